#include "forgeline/fabric/stores.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/sha.h>

#include "forgeline/common/error.hpp"

namespace forgeline::fabric {

void CacheStore::put(const std::string& key, nlohmann::json value) {
  std::unique_lock lock(mutex_);
  entries_[key] = std::move(value);
}

std::optional<nlohmann::json> CacheStore::get(std::string_view key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return std::optional<nlohmann::json>(std::in_place, it->second);
}

bool CacheStore::erase(std::string_view key) {
  std::unique_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return false;
  entries_.erase(it);
  return true;
}

std::size_t CacheStore::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::uint64_t TelemetryStore::append(std::string type, std::int64_t time_ns, nlohmann::json payload) {
  std::unique_lock lock(mutex_);
  const std::uint64_t seq = entries_.size();
  entries_.push_back({seq, time_ns, std::move(type), std::move(payload)});
  return seq;
}

std::vector<LogEntry> TelemetryStore::scan(std::int64_t from_ns, std::int64_t to_ns,
                                           std::optional<std::string_view> type) const {
  std::shared_lock lock(mutex_);
  std::vector<LogEntry> out;
  for (const LogEntry& e : entries_) {
    if (e.time_ns < from_ns || e.time_ns >= to_ns) continue;
    if (type && e.type != *type) continue;
    out.push_back(e);
  }
  return out;
}

std::size_t TelemetryStore::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::size_t TelemetryStore::count(std::string_view type) const {
  std::shared_lock lock(mutex_);
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [&](const LogEntry& e) { return e.type == type; }));
}

std::string AlgorithmStore::version_of(std::string_view bytes) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest.data());
  std::ostringstream hex;
  for (std::size_t i = 0; i < 8; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string AlgorithmStore::put(std::string bytes) {
  std::string version = version_of(bytes);
  std::unique_lock lock(mutex_);
  blobs_.try_emplace(version, std::move(bytes));
  return version;
}

std::string AlgorithmStore::get(std::string_view version) const {
  std::shared_lock lock(mutex_);
  auto it = blobs_.find(version);
  if (it == blobs_.end()) throw NotFoundError("unknown algorithm version '" + std::string(version) + "'");
  return it->second;
}

bool AlgorithmStore::contains(std::string_view version) const {
  std::shared_lock lock(mutex_);
  return blobs_.contains(version);
}

std::vector<std::string> AlgorithmStore::versions() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [v, _] : blobs_) out.push_back(v);
  return out;
}

void AlgorithmStore::save_dir(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::shared_lock lock(mutex_);
  for (const auto& [version, bytes] : blobs_) {
    std::ofstream out(dir / (version + ".bundle"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write algorithm bundle " + version);
  }
}

void AlgorithmStore::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir)) return;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".bundle") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string version = put(std::move(bytes));
    if (version != entry.path().stem().string()) {
      throw Error("bundle " + entry.path().string() + " does not match its content hash");
    }
  }
}

PowerConfigStore::PowerConfigStore() {
  active_[Mode::NormalProduction] = {"drl", ""};
  active_[Mode::Warmholding] = {"rule", "builtin"};
}

ManagerSelection PowerConfigStore::get(Mode mode) const {
  std::shared_lock lock(mutex_);
  return active_.at(mode);
}

void PowerConfigStore::set(Mode mode, ManagerSelection selection) {
  if (selection.manager_id.empty()) throw ConfigError("manager id must not be empty");
  std::unique_lock lock(mutex_);
  active_[mode] = std::move(selection);
}

nlohmann::json PowerConfigStore::to_json() const {
  std::shared_lock lock(mutex_);
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [mode, sel] : active_) {
    j[std::string(to_string(mode))] = {{"manager", sel.manager_id}, {"version", sel.version}};
  }
  return j;
}

void PowerConfigStore::from_json(const nlohmann::json& j) {
  std::map<Mode, ManagerSelection> loaded;
  {
    std::shared_lock lock(mutex_);
    loaded = active_;
  }
  for (const auto& [key, value] : j.items()) {
    loaded[mode_from_string(key)] = {value.at("manager").get<std::string>(),
                                     value.at("version").get<std::string>()};
  }
  std::unique_lock lock(mutex_);
  active_ = std::move(loaded);
}

ForgeSensorsState ForgeSensorsStore::get() const {
  std::shared_lock lock(mutex_);
  return state_;
}

void ForgeSensorsStore::update(Mode mode, const ZoneVector& voltages, std::string material_id,
                               std::int64_t now_ns) {
  std::unique_lock lock(mutex_);
  state_.mode = mode;
  state_.voltages = voltages;
  state_.material_id = std::move(material_id);
  state_.refreshed_ns = now_ns;
  ++state_.refresh_count;
  state_.valid = true;
  state_.stale = false;
}

void ForgeSensorsStore::set_mode(Mode mode) {
  std::unique_lock lock(mutex_);
  state_.mode = mode;
}

void ForgeSensorsStore::mark_stale() {
  std::unique_lock lock(mutex_);
  state_.stale = true;
}

}  // namespace forgeline::fabric
