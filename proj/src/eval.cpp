#include "latent/eval.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "latent/error.hpp"
#include "latent/parallel.hpp"
#include "latent/text.hpp"

namespace latent {

AttenuationCurve attenuation_curve(const Subspace& s) {
  const ProvenanceEntry* suppress = nullptr;
  for (const auto& p : s.provenance) {
    if (p.role != Role::suppress) continue;
    if (suppress) throw ConfigError("attenuation curve needs exactly one suppress stage");
    suppress = &p;
  }
  if (!suppress) throw ConfigError("attenuation curve needs exactly one suppress stage");
  if (!(suppress->lambda0 > 0.0)) throw NumericError("suppress Gram " + suppress->criterion + " is zero");
  AttenuationCurve c;
  c.space = std::string(to_string(s.space.space));
  for (double a : s.activation) {
    c.ratios.push_back(a / suppress->lambda0);
    c.log10_ratios.push_back(std::log10(c.ratios.back()));
  }
  return c;
}

AttenuationCurve attenuation_curve(const FormulationPlan& plan, const SubspaceContext& ctx) {
  std::size_t suppress = 0;
  for (const auto& st : plan.stages) suppress += st.role == Role::suppress;
  if (suppress != 1) throw ConfigError("attenuation curve needs exactly one suppress stage");
  return attenuation_curve(build_subspace(plan, ctx));
}

ManipulationMetrics manipulation_metrics(const Subspace& s, std::size_t top_k, double magnitude,
                                         const std::vector<Vector>& codes, const ToyGenerator& gen,
                                         const AnalysisModels& models, std::string_view region) {
  if (codes.empty()) throw ConfigError("manipulation metrics need at least one code");
  if (top_k == 0 || top_k > s.dim())
    throw ConfigError("top_k " + std::to_string(top_k) + " outside [1, " + std::to_string(s.dim()) + "]");
  const DiffMap embed = models.identity_embedder();
  struct Sums {
    double inside = 0.0, outside = 0.0, identity = 0.0;
  };
  std::vector<Sums> per_code(codes.size());
  parallel_for(codes.size(), [&](std::size_t i) {
    const Vector& u = codes[i];
    const Image before = gen.generate(s.space.space, u);
    const PixelMask mask = models.parse(before).mask(region);
    const std::size_t in_count = mask.count();
    if (in_count == 0 || in_count == mask.bits.size())
      throw ConfigError("region '" + std::string(region) + "' mask or its complement is empty for code " +
                        std::to_string(i));
    const Vector e0 = embed.evaluate(before.values);
    Sums& acc = per_code[i];
    for (std::size_t k = 0; k < top_k; ++k) {
      const Image after = gen.generate(s.space.space, perturb(u, s.basis, k, magnitude));
      double in = 0.0, out = 0.0;
      for (std::size_t p = 0; p < mask.bits.size(); ++p) {
        double d = 0.0;
        for (std::size_t c = 0; c < 3; ++c) d += std::abs(after.values[3 * p + c] - before.values[3 * p + c]);
        (mask.test(p) ? in : out) += d;
      }
      acc.inside += in / (3.0 * static_cast<double>(in_count));
      acc.outside += out / (3.0 * static_cast<double>(mask.bits.size() - in_count));
      acc.identity += dot(e0, embed.evaluate(after.values));
    }
  });
  ManipulationMetrics m;
  m.plan = s.formulation;
  m.magnitude = magnitude;
  m.top_k = top_k;
  m.n = codes.size();
  Sums total;
  for (const auto& c : per_code) {
    total.inside += c.inside;
    total.outside += c.outside;
    total.identity += c.identity;
  }
  const double count = static_cast<double>(codes.size() * top_k);
  m.inside = total.inside / count;
  m.outside = total.outside / count;
  m.identity = total.identity / count;
  return m;
}

Image grid_image(const std::vector<Image>& images, int rows, int cols) {
  if (images.empty()) throw ConfigError("grid needs at least one image");
  if (rows < 1 || cols < 1 || images.size() > static_cast<std::size_t>(rows) * cols)
    throw DimensionError("grid layout too small for " + std::to_string(images.size()) + " images");
  const int th = images.front().height, tw = images.front().width;
  for (const auto& im : images)
    if (im.height != th || im.width != tw) throw DimensionError("grid tiles differ in size");
  const int sep = kGridSeparator;
  Image canvas(rows * th + (rows + 1) * sep, cols * tw + (cols + 1) * sep, 1.0);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const int r0 = sep + static_cast<int>(i) / cols * (th + sep);
    const int c0 = sep + static_cast<int>(i) % cols * (tw + sep);
    for (int r = 0; r < th; ++r)
      for (int c = 0; c < tw; ++c)
        for (int ch = 0; ch < 3; ++ch) canvas.at(r0 + r, c0 + c, ch) = images[i].at(r, c, ch);
  }
  return canvas;
}

void emit_grid(const std::vector<Image>& images, int rows, int cols, const std::vector<std::string>& labels,
               const std::filesystem::path& path) {
  write_ppm(path, grid_image(images, rows, cols), labels);
}

namespace {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> split_fields(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quote", line_no, line.size(), "");
  out.push_back(std::move(cur));
  return out;
}

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double number_field(const std::string& s, std::size_t line_no) {
  const auto v = parse_double(s);
  if (!v) throw ParseError("expected a number", line_no, 1, s);
  return *v;
}

std::size_t count_field(const std::string& s, std::size_t line_no) {
  const auto v = parse_u64(s);
  if (!v) throw ParseError("expected a count", line_no, 1, s);
  return static_cast<std::size_t>(*v);
}

constexpr std::string_view kAttenuationHeader = "component,lambda_ratio,log10_ratio";
constexpr std::string_view kMetricsHeader = "plan,magnitude,top_k,inside,outside,identity,n";

}  // namespace

std::string format_attenuation_csv(const AttenuationCurve& curve) {
  std::string out(kAttenuationHeader);
  out += '\n';
  for (std::size_t k = 0; k < curve.ratios.size(); ++k)
    out += std::to_string(k) + "," + format_double(curve.ratios[k]) + "," + format_double(curve.log10_ratios[k]) + "\n";
  return out;
}

AttenuationCurve parse_attenuation_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != kAttenuationHeader) throw ParseError("bad attenuation header", 1, 1, "");
  AttenuationCurve c;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i], i + 1);
    if (f.size() != 3) throw ParseError("expected 3 fields", i + 1, 1, lines[i]);
    if (count_field(f[0], i + 1) != i - 1) throw ParseError("components out of order", i + 1, 1, f[0]);
    c.ratios.push_back(number_field(f[1], i + 1));
    c.log10_ratios.push_back(number_field(f[2], i + 1));
  }
  return c;
}

std::string format_metrics_csv(const std::vector<ManipulationMetrics>& rows) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& m : rows)
    out += quote_field(m.plan) + "," + format_double(m.magnitude) + "," + std::to_string(m.top_k) + "," +
           format_double(m.inside) + "," + format_double(m.outside) + "," + format_double(m.identity) + "," +
           std::to_string(m.n) + "\n";
  return out;
}

std::vector<ManipulationMetrics> parse_metrics_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != kMetricsHeader) throw ParseError("bad metrics header", 1, 1, "");
  std::vector<ManipulationMetrics> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i], i + 1);
    if (f.size() != 7) throw ParseError("expected 7 fields", i + 1, 1, lines[i]);
    ManipulationMetrics m;
    m.plan = f[0];
    m.magnitude = number_field(f[1], i + 1);
    m.top_k = count_field(f[2], i + 1);
    m.inside = number_field(f[3], i + 1);
    m.outside = number_field(f[4], i + 1);
    m.identity = number_field(f[5], i + 1);
    m.n = count_field(f[6], i + 1);
    rows.push_back(std::move(m));
  }
  return rows;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error("cannot write " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace latent
