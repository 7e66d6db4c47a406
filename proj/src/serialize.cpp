#include "wiretap/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace wiretap {

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::vector<double> row_vector(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::vector<double> v(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) v[static_cast<std::size_t>(c)] = m(r, c);
  return v;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  return json::parse(in);
}

}  // namespace

Dmc channel_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (j.is_string()) return channel_from_json(json{{"type", j.get<std::string>()}}, base_dir);
  if (!j.is_object()) throw std::invalid_argument("channel must be an object");
  if (j.contains("file")) {
    std::filesystem::path p = j.at("file").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    return channel_from_json(read_json_file(p), p.parent_path());
  }
  const std::string type = j.value("type", j.contains("rows") ? "table" : "");
  if (type == "bsc") return Dmc::bsc(j.at("p").get<double>());
  if (type == "bec") return Dmc::bec(j.at("eps").get<double>());
  if (type == "noiseless") return Dmc::noiseless();
  if (type == "pure_noise") {
    std::vector<double> pz = j.value("pz", std::vector<double>{1.0});
    return Dmc::pure_noise(Eigen::Map<Eigen::VectorXd>(pz.data(), static_cast<Eigen::Index>(pz.size())));
  }
  if (type == "table") {
    auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
    if (rows.size() != 2 || rows[0].size() != rows[1].size() || rows[0].empty())
      throw std::invalid_argument("channel table needs two rows of equal, nonzero length");
    TransitionTable t(2, static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < rows[x].size(); ++y) t(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = rows[x][y];
    return Dmc::from_table(t, j.value("name", "table"));
  }
  throw std::invalid_argument("unknown channel type '" + type + "'");
}

json to_json(const Dmc& c) { return {{"name", c.name}, {"rows", {row_vector(c.table, 0), row_vector(c.table, 1)}}}; }

SourceSpec source_from_json(const json& j) {
  const std::string type = j.value("type", "uniform");
  if (type == "uniform") return SourceSpec::uniform_identity();
  if (type == "conditional") return SourceSpec::from_conditional(j.at("pu").get<double>(), j.at("flip").get<double>());
  if (type == "joint") {
    auto q = j.at("q").get<std::vector<std::vector<double>>>();
    if (q.size() != 2 || q[0].size() != 2 || q[1].size() != 2) throw std::invalid_argument("source q must be 2x2");
    Eigen::Matrix2d m;
    m << q[0][0], q[0][1], q[1][0], q[1][1];
    return SourceSpec::from_joint(m);
  }
  throw std::invalid_argument("unknown source type '" + type + "'");
}

json to_json(const SourceSpec& s) {
  return {{"type", "joint"}, {"q", {{s.q(0, 0), s.q(0, 1)}, {s.q(1, 0), s.q(1, 1)}}}};
}

json to_json(const IndexSets& s) {
  return {{"K", s.K},     {"V_U", s.V_U},   {"H_U", s.H_U},   {"V_UY", s.V_UY},
          {"H_UY", s.H_UY}, {"V_X", s.V_X}, {"V_XU", s.V_XU}, {"repairs", s.repairs}};
}

IndexSets index_sets_from_json(const json& j) {
  IndexSets s;
  s.K = j.at("K").get<std::size_t>();
  s.V_U = j.at("V_U").get<IndexSet>();
  s.H_U = j.at("H_U").get<IndexSet>();
  s.V_UY = j.at("V_UY").get<IndexSet>();
  s.H_UY = j.at("H_UY").get<IndexSet>();
  s.V_X = j.at("V_X").get<IndexSet>();
  s.V_XU = j.at("V_XU").get<IndexSet>();
  s.repairs = j.value("repairs", std::size_t{0});
  s.check();
  return s;
}

json to_json(const EntropyProfile& p) {
  return {{"h", p.h}, {"mode", to_string(p.mode)}, {"samples", p.samples}, {"seed", p.seed}, {"discarded", p.discarded}};
}

EntropyProfile profile_from_json(const json& j) {
  EntropyProfile p;
  p.h = j.at("h").get<std::vector<double>>();
  p.mode = j.at("mode").get<std::string>() == "exact" ? ProfileMode::exact : ProfileMode::monte_carlo;
  p.samples = j.at("samples").get<std::size_t>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.discarded = j.at("discarded").get<std::size_t>();
  return p;
}

json to_json(const RateTerms& t) {
  return {{"H_U", t.H_U},   {"H_U_given_X", t.H_UX}, {"I_UX", t.I_UX}, {"I_UY", t.I_UY},
          {"H_U_given_Y", t.H_UY}, {"I_UZ", t.I_UZ},  {"H_U_given_Z", t.H_UZ}};
}

json to_json(const CodeConfig& c) {
  return {{"K", c.K},
          {"pieces", c.pieces},
          {"N", c.N()},
          {"L", c.L},
          {"B", c.B},
          {"B0", c.B0},
          {"alpha", c.alpha.str()},
          {"beta", c.beta},
          {"delta", PolarParams::make(c.K, c.beta).delta()},
          {"xi", c.xi},
          {"backoff", c.backoff},
          {"sample_mode", to_string(c.sample_mode)},
          {"set_sizes",
           {{"V_U", c.sets.V_U.size()},
            {"H_U", c.sets.H_U.size()},
            {"V_UY", c.sets.V_UY.size()},
            {"H_UY", c.sets.H_UY.size()},
            {"V_X", c.sets.V_X.size()},
            {"V_XU", c.sets.V_XU.size()},
            {"repairs", c.sets.repairs}}},
          {"e_length", c.e_len},
          {"e_prime_length", c.e_prime_len},
          {"r", c.r},
          {"r_formula", c.r_formula},
          {"message_lengths", [&] {
             std::vector<std::size_t> m;
             for (std::size_t b = 0; b < c.B; ++b) m.push_back(c.message_length(b));
             return m;
           }()},
          {"randomizer_length", c.randomizer_length()},
          {"l_key", c.l_key},
          {"l_otp", c.l_otp},
          {"hash_field", c.hash_length() ? c.hash_field.describe() : ""},
          {"init_field_degree", c.init_field.n},
          {"rate_terms", to_json(c.terms)},
          {"theoretical_rate", c.rate_theoretical},
          {"achieved_rate", c.achieved_rate()}};
}

json to_json(const CheckReport& r) {
  json j = {{"quantity", r.quantity}, {"bound", r.bound}, {"bound_ref", r.bound_ref}, {"pass", r.pass}};
  j["exact_value"] = std::isinf(r.exact_value) ? json("inf") : json(r.exact_value);
  if (!r.extra.empty()) j["extra"] = r.extra;
  return j;
}

json to_json(const BlockRecord& b) {
  return {{"T", to_string(b.t)},          {"A", to_string(b.a)},
          {"U", to_string(b.u)},          {"V", to_string(b.v)},
          {"X", to_string(b.x)},          {"Y", b.y},
          {"Z", b.z},                     {"eve_states", b.eve_states},
          {"tap", b.tap},                 {"tap_values", to_string(b.tap_values)},
          {"R", to_string(b.r)},          {"R_prime", to_string(b.r_prime)},
          {"E", to_string(b.e)},          {"E_prime", to_string(b.e_prime)}};
}

json to_json(const SessionTranscript& t) {
  json blocks = json::array();
  for (const auto& b : t.blocks) blocks.push_back(to_json(b));
  return {{"main_state", t.main_state},
          {"blocks", blocks},
          {"otp_ciphertext", to_string(t.otp_ciphertext)},
          {"otp_aux", {{"length", t.otp_aux.length}, {"received", t.otp_aux.received}}}};
}

// ---------------------------------------------------------------------------

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

DirectoryProfileStore::DirectoryProfileStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path DirectoryProfileStore::file_for(const std::string& key) const {
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.json", static_cast<unsigned long long>(fnv1a64(key)));
  return dir_ / name;
}

std::optional<EntropyProfile> DirectoryProfileStore::load(const std::string& key) const {
  const auto path = file_for(key);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    json j = json::parse(in);
    if (j.at("key").get<std::string>() != key) return std::nullopt;  // hash collision
    return profile_from_json(j.at("profile"));
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable entries are recomputed and overwritten
  }
}

void DirectoryProfileStore::save(const std::string& key, const EntropyProfile& profile) const {
  json j = {{"key", key}, {"profile", to_json(profile)}};
  write_text_atomic(file_for(key), j.dump());
}

}  // namespace wiretap
