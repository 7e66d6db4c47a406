#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "wiretap/compound.hpp"
#include "wiretap/leakage.hpp"

namespace wiretap {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& text);

// Channel specs: {"type": "bsc", "p": 0.1}, {"type": "bec", "eps": 0.4},
// {"type": "noiseless"}, {"type": "pure_noise", "pz": [...]},
// {"type": "table", "rows": [[...], [...]]}, or {"file": "path.json"} holding one
// of those (relative to base_dir).
Dmc channel_from_json(const json& j, const std::filesystem::path& base_dir = {});
json to_json(const Dmc& c);

// {"type": "uniform"}, {"type": "conditional", "pu": 0.3, "flip": 0.1} or
// {"type": "joint", "q": [[q00, q01], [q10, q11]]}
SourceSpec source_from_json(const json& j);
json to_json(const SourceSpec& s);

json to_json(const IndexSets& s);
IndexSets index_sets_from_json(const json& j);
json to_json(const EntropyProfile& p);
EntropyProfile profile_from_json(const json& j);
json to_json(const RateTerms& t);
json to_json(const CodeConfig& c);
json to_json(const CheckReport& r);
json to_json(const BlockRecord& b);
json to_json(const SessionTranscript& t);

// Profiles stored as <dir>/<fnv1a64(key) hex>.json; the full key is kept in
// the file and compared on load. Writes go to a temporary file first and are
// renamed into place.
class DirectoryProfileStore final : public ProfileStore {
 public:
  explicit DirectoryProfileStore(std::filesystem::path dir);
  std::optional<EntropyProfile> load(const std::string& key) const override;
  void save(const std::string& key, const EntropyProfile& profile) const override;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path file_for(const std::string& key) const;
  std::filesystem::path dir_;
};

void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace wiretap
