#include "latent/config.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "latent/error.hpp"
#include "latent/eval.hpp"
#include "latent/text.hpp"

namespace latent {

namespace {

struct Line {
  std::size_t number;
  std::string key;
  std::string value;
};

std::vector<Line> key_values(std::string_view text) {
  std::vector<Line> out;
  std::size_t start = 0, number = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", number, 1, std::string(line));
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("missing key", number, 1, std::string(line));
    out.push_back({number, std::string(key), std::string(trim(line.substr(eq + 1)))});
    if (end == text.size()) break;
  }
  return out;
}

[[noreturn]] void bad_value(const Line& l, const std::string& what) {
  throw ParseError("bad value for '" + l.key + "': " + what, l.number, l.key.size() + 4, l.value);
}

double number(const Line& l) {
  const auto v = parse_double(l.value);
  if (!v || !std::isfinite(*v)) bad_value(l, "expected a number");
  return *v;
}

std::uint64_t count(const Line& l) {
  const auto v = parse_u64(l.value);
  if (!v) bad_value(l, "expected a non-negative integer");
  return *v;
}

bool boolean(const Line& l) {
  if (l.value == "true") return true;
  if (l.value == "false") return false;
  bad_value(l, "expected true or false");
}

std::optional<double> optional_number(const Line& l) {
  if (l.value.empty()) return std::nullopt;
  return number(l);
}

std::string optional_text(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == ',')) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t' && text[j] != ',') ++j;
    const auto v = parse_double(text.substr(i, j - i));
    if (!v || !std::isfinite(*v)) throw ParseError("expected a number", 1, i + 1, std::string(text.substr(i, j - i)));
    out.push_back(*v);
    i = j;
  }
  return out;
}

std::string format_number_list(std::span<const double> values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ' ';
    out += format_double(v);
  }
  return out;
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  bool explicit_codes = false;
  using Setter = std::function<void(const Line&)>;
  const std::map<std::string, Setter> setters = {
      {"seed", [&](const Line& l) { c.seed = count(l); }},
      {"space",
       [&](const Line& l) {
         try {
           c.space = parse_space(l.value);
         } catch (const Error&) {
           bad_value(l, "expected input or style");
         }
       }},
      {"input_dim", [&](const Line& l) { c.input_dim = count(l); }},
      {"image_size", [&](const Line& l) { c.image_size = static_cast<int>(count(l)); }},
      {"beta", [&](const Line& l) { c.beta = number(l); }},
      {"tau", [&](const Line& l) { c.tau = number(l); }},
      {"plan",
       [&](const Line& l) {
         if (l.value.empty()) bad_value(l, "empty plan");
         c.plan = l.value;
       }},
      {"epsilon", [&](const Line& l) { c.epsilon = number(l); }},
      {"method",
       [&](const Line& l) {
         try {
           c.method = parse_gram_method(l.value);
         } catch (const Error&) {
           bad_value(l, "expected direct, trick or auto");
         }
       }},
      {"alpha", [&](const Line& l) { c.alpha = number(l); }},
      {"frequency_factor", [&](const Line& l) { c.frequency_factor = static_cast<int>(count(l)); }},
      {"train_codes", [&](const Line& l) { c.train_codes = count(l); }},
      {"train_code",
       [&](const Line& l) {
         if (!explicit_codes) c.train_code_values.clear();
         explicit_codes = true;
         try {
           c.train_code_values.push_back(parse_number_list(l.value));
         } catch (const ParseError&) {
           bad_value(l, "expected a list of numbers");
         }
       }},
      {"test_codes", [&](const Line& l) { c.test_codes = count(l); }},
      {"code_index", [&](const Line& l) { c.code_index = count(l); }},
      {"region", [&](const Line& l) { c.region = l.value; }},
      {"top_k", [&](const Line& l) { c.top_k = count(l); }},
      {"magnitudes",
       [&](const Line& l) {
         try {
           c.magnitudes = parse_number_list(l.value);
         } catch (const ParseError&) {
           bad_value(l, "expected a list of numbers");
         }
       }},
      {"component", [&](const Line& l) { c.component = count(l); }},
      {"classifier", [&](const Line& l) { c.classifier = l.value; }},
      {"cf.step_size", [&](const Line& l) { c.cf.step_size = number(l); }},
      {"cf.max_iters", [&](const Line& l) { c.cf.max_iters = count(l); }},
      {"cf.target_logit", [&](const Line& l) { c.cf.target_logit = optional_number(l); }},
      {"cf.plateau_tol", [&](const Line& l) { c.cf.plateau_tol = number(l); }},
      {"cf.magnitude_cap", [&](const Line& l) { c.cf.magnitude_cap = optional_number(l); }},
      {"cf.descend", [&](const Line& l) { c.cf.descend = boolean(l); }},
      {"out", [&](const Line& l) { c.out = l.value; }},
  };
  for (const auto& l : key_values(text)) {
    const auto it = setters.find(l.key);
    if (it == setters.end()) throw ParseError("unknown key", l.number, 1, l.key);
    it->second(l);
  }
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (!(c.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (c.cf.max_iters < 1) throw ConfigError("cf.max_iters must be at least 1");
  return c;
}

std::string emit_config(const RunConfig& c) {
  std::string out;
  auto put = [&](std::string_view key, const std::string& value) {
    out += std::string(key) + " = " + value + "\n";
  };
  put("seed", std::to_string(c.seed));
  put("space", std::string(to_string(c.space)));
  put("input_dim", std::to_string(c.input_dim));
  put("image_size", std::to_string(c.image_size));
  put("beta", format_double(c.beta));
  put("tau", format_double(c.tau));
  put("plan", c.plan);
  put("epsilon", format_double(c.epsilon));
  put("method", std::string(to_string(c.method)));
  put("alpha", format_double(c.alpha));
  put("frequency_factor", std::to_string(c.frequency_factor));
  put("train_codes", std::to_string(c.train_codes));
  for (const auto& v : c.train_code_values) put("train_code", format_number_list(v));
  put("test_codes", std::to_string(c.test_codes));
  put("code_index", std::to_string(c.code_index));
  put("region", c.region);
  put("top_k", std::to_string(c.top_k));
  put("magnitudes", format_number_list(c.magnitudes));
  put("component", std::to_string(c.component));
  put("classifier", c.classifier);
  put("cf.step_size", format_double(c.cf.step_size));
  put("cf.max_iters", std::to_string(c.cf.max_iters));
  put("cf.target_logit", optional_text(c.cf.target_logit));
  put("cf.plateau_tol", format_double(c.cf.plateau_tol));
  put("cf.magnitude_cap", optional_text(c.cf.magnitude_cap));
  put("cf.descend", c.cf.descend ? "true" : "false");
  put("out", c.out);
  return out;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_text(path)); }

GeneratorParams generator_params(const RunConfig& c) {
  GeneratorParams p;
  p.seed = c.seed;
  p.input_dim = c.input_dim;
  p.image_size = c.image_size;
  p.beta = c.beta;
  return p;
}

AnalysisParams analysis_params(const RunConfig& c) {
  AnalysisParams p;
  p.seed = c.seed;
  p.image_size = c.image_size;
  p.tau = c.tau;
  return p;
}

std::vector<Vector> training_codes(const RunConfig& c, const ToyGenerator& gen, LatentSpace space) {
  if (c.train_code_values.empty()) return sample_codes(gen, space, c.seed, "train", c.train_codes);
  for (const auto& v : c.train_code_values)
    if (v.size() != gen.dim(space))
      throw ConfigError("train_code has " + std::to_string(v.size()) + " entries, the " +
                        std::string(to_string(space)) + " space needs " + std::to_string(gen.dim(space)));
  return c.train_code_values;
}

std::vector<Vector> test_codes(const RunConfig& c, const ToyGenerator& gen, LatentSpace space) {
  return sample_codes(gen, space, c.seed, "test", c.test_codes);
}

std::string format_manifest(const StoredSubspace& st) {
  const Subspace& s = st.subspace;
  std::string out;
  auto put = [&](std::string_view key, const std::string& value) {
    out += std::string(key) + " = " + value + "\n";
  };
  put("formulation", s.formulation);
  put("space", std::string(to_string(s.space.space)));
  put("dim", std::to_string(s.space.dim));
  put("columns", std::to_string(s.dim()));
  put("seed", std::to_string(st.seed));
  put("method", std::string(to_string(st.method)));
  put("alpha", format_double(st.alpha));
  put("activation", format_number_list(s.activation));
  for (const auto& p : s.provenance)
    put("stage", std::string(to_string(p.role)) + " " + p.criterion + " " + format_double(p.epsilon) + " " +
                     format_double(p.lambda0));
  for (const auto& v : st.training_codes) put("training_code", format_number_list(v));
  return out;
}

StoredSubspace parse_manifest(std::string_view text) {
  StoredSubspace st;
  Subspace& s = st.subspace;
  std::size_t columns = 0;
  for (const auto& l : key_values(text)) {
    if (l.key == "formulation") {
      s.formulation = l.value;
    } else if (l.key == "space") {
      s.space.space = parse_space(l.value);
    } else if (l.key == "dim") {
      s.space.dim = count(l);
    } else if (l.key == "columns") {
      columns = count(l);
    } else if (l.key == "seed") {
      st.seed = count(l);
    } else if (l.key == "method") {
      st.method = parse_gram_method(l.value);
    } else if (l.key == "alpha") {
      st.alpha = number(l);
    } else if (l.key == "activation") {
      s.activation = parse_number_list(l.value);
    } else if (l.key == "stage") {
      const auto a = l.value.find(' ');
      const auto b = a == std::string::npos ? a : l.value.find(' ', a + 1);
      const auto c = b == std::string::npos ? b : l.value.find(' ', b + 1);
      if (c == std::string::npos) bad_value(l, "expected 'role criterion epsilon lambda0'");
      ProvenanceEntry p;
      const std::string role = l.value.substr(0, a);
      if (role != "activate" && role != "suppress") bad_value(l, "unknown role");
      p.role = role == "activate" ? Role::activate : Role::suppress;
      p.criterion = l.value.substr(a + 1, b - a - 1);
      const auto eps = parse_double(l.value.substr(b + 1, c - b - 1));
      const auto lam = parse_double(l.value.substr(c + 1));
      if (!eps || !lam) bad_value(l, "expected numbers");
      p.epsilon = *eps;
      p.lambda0 = *lam;
      s.provenance.push_back(std::move(p));
    } else if (l.key == "training_code") {
      st.training_codes.push_back(parse_number_list(l.value));
    } else {
      throw ParseError("unknown manifest key", l.number, 1, l.key);
    }
  }
  if (s.activation.size() != columns) throw ConfigError("manifest activation count differs from columns");
  return st;
}

std::filesystem::path manifest_path(const std::filesystem::path& basis_path) {
  auto p = basis_path;
  p.replace_extension(".manifest");
  return p;
}

void save_subspace(const std::filesystem::path& basis_path, const StoredSubspace& stored) {
  write_matrix(basis_path, stored.subspace.basis);
  write_text(manifest_path(basis_path), format_manifest(stored));
}

StoredSubspace load_subspace(const std::filesystem::path& basis_path) {
  StoredSubspace st = parse_manifest(read_text(manifest_path(basis_path)));
  st.subspace.basis = read_matrix(basis_path);
  if (st.subspace.basis.rows() != st.subspace.space.dim || st.subspace.basis.cols() != st.subspace.activation.size())
    throw FormatError("basis shape does not match its manifest", 0);
  return st;
}

}  // namespace latent
