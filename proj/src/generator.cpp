#include "latent/generator.hpp"

#include <cmath>
#include <memory>

#include "latent/error.hpp"
#include "latent/rng.hpp"

namespace latent {

std::string_view to_string(LatentSpace space) { return space == LatentSpace::input ? "input" : "style"; }

LatentSpace parse_space(std::string_view name) {
  if (name == "input") return LatentSpace::input;
  if (name == "style") return LatentSpace::style;
  throw ConfigError("unknown latent space '" + std::string(name) + "' (expected input or style)");
}

std::string_view to_string(Blob blob) {
  static constexpr std::array<std::string_view, kBlobCount> names = {"hair", "skin", "left_eye", "right_eye",
                                                                     "nose", "lips", "inner_mouth"};
  return names[static_cast<std::size_t>(blob)];
}

const Palette& template_palette() {
  static const Palette palette{{{
                                   {0.22, 0.83, 0.31},  // hair
                                   {0.90, 0.70, 0.55},  // skin
                                   {0.37, 0.30, 0.68},  // left eye
                                   {0.37, 0.30, 0.68},  // right eye
                                   {0.95, 0.95, 0.05},  // nose
                                   {0.65, 0.27, 0.05},  // lips
                                   {0.95, 0.05, 0.60},  // inner mouth
                               }},
                               {0.44, 0.95, 0.95}};
  return palette;
}

namespace {

struct Ellipse {
  double cx, cy, ax, ay, angle;
};

// Template geometry on a 64-pixel canvas; slightly asymmetric on purpose so
// the landmark set has no cocircular quadruples.
constexpr std::array<Ellipse, kBlobCount> kTemplate = {{
    {32.0, 14.5, 24.0, 12.5, 0.0},   // hair
    {32.0, 34.0, 16.0, 19.5, 0.0},   // skin
    {24.2, 29.0, 4.4, 2.3, 0.0},     // left eye
    {39.9, 29.3, 4.2, 2.4, 0.0},     // right eye
    {32.2, 36.8, 2.3, 4.8, 0.0},     // nose
    {31.9, 45.6, 7.6, 3.3, 0.0},     // lips
    {31.9, 45.7, 5.2, 1.4, 0.0},     // inner mouth
}};

constexpr std::array<double, kBlobCount> kPriority = {30.0, 1000.0, 1e6, 1e6, 3e4, 3e4, 1e6};
constexpr double kBackgroundPriority = 1.0;

constexpr std::size_t kBgParam = kBlobCount * kParamsPerBlob;

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::size_t param(Blob b, std::size_t k) { return static_cast<std::size_t>(b) * kParamsPerBlob + k; }

struct MapperGroup {
  std::vector<std::size_t> entries;
  double gain;
};

// Each input coordinate drives a semantic group of style coordinates with
// tied, seeded mixing weights. Large-area groups get higher gain.
const std::vector<MapperGroup>& mapper_groups() {
  using namespace style_index;
  const auto b = [](Blob blob, std::size_t k) { return blob_base(blob) + k; };
  static const std::vector<MapperGroup> groups = {
      {{translate_x}, 1.5},
      {{translate_y}, 1.5},
      {{brightness, background, background + 1, background + 2}, 1.5},
      {{face_scale, b(Blob::skin, 2), b(Blob::skin, 3)}, 1.2},
      {{eye_spacing, b(Blob::left_eye, 2), b(Blob::left_eye, 3), b(Blob::right_eye, 2), b(Blob::right_eye, 3)}, 0.8},
      {{mouth_open, b(Blob::inner_mouth, 3), b(Blob::lips, 3)}, 0.8},
      {{b(Blob::hair, 0), b(Blob::hair, 1), b(Blob::hair, 2), b(Blob::hair, 3)}, 1.2},
      {{b(Blob::hair, 4), b(Blob::hair, 5), b(Blob::hair, 6)}, 1.5},
      {{b(Blob::skin, 0), b(Blob::skin, 1), skin_rotation}, 1.2},
      {{b(Blob::skin, 2), b(Blob::skin, 3), face_scale}, 1.2},
      {{b(Blob::skin, 4), b(Blob::skin, 5), b(Blob::skin, 6)}, 1.5},
      {{b(Blob::left_eye, 0), b(Blob::left_eye, 1), b(Blob::right_eye, 0), b(Blob::right_eye, 1)}, 0.8},
      {{b(Blob::left_eye, 4), b(Blob::left_eye, 5), b(Blob::left_eye, 6), b(Blob::right_eye, 4),
        b(Blob::right_eye, 5), b(Blob::right_eye, 6)},
       0.8},
      {{b(Blob::nose, 0), b(Blob::nose, 1), b(Blob::nose, 2), b(Blob::nose, 3)}, 0.8},
      {{b(Blob::nose, 4), b(Blob::nose, 5), b(Blob::nose, 6)}, 0.8},
      {{b(Blob::lips, 0), b(Blob::lips, 1), b(Blob::inner_mouth, 0), b(Blob::inner_mouth, 1)}, 0.8},
      {{b(Blob::lips, 2), b(Blob::lips, 3), mouth_rotation}, 0.8},
      {{b(Blob::lips, 4), b(Blob::lips, 5), b(Blob::lips, 6)}, 0.8},
      {{b(Blob::inner_mouth, 2), b(Blob::inner_mouth, 3)}, 0.8},
      {{b(Blob::inner_mouth, 4), b(Blob::inner_mouth, 5), b(Blob::inner_mouth, 6)}, 0.8},
      {{background, background + 1, background + 2}, 1.5},
      {{b(Blob::left_eye, 2), b(Blob::left_eye, 3), b(Blob::right_eye, 2), b(Blob::right_eye, 3)}, 0.8},
      {{b(Blob::skin, 4), b(Blob::skin, 5), b(Blob::skin, 6), b(Blob::hair, 4), b(Blob::hair, 5), b(Blob::hair, 6)},
       1.5},
      {{b(Blob::lips, 4), b(Blob::lips, 5), b(Blob::lips, 6), b(Blob::inner_mouth, 4), b(Blob::inner_mouth, 5),
        b(Blob::inner_mouth, 6)},
       0.8},
  };
  return groups;
}

constexpr double kMapperLeak = 0.02;
constexpr double kMapperMixing = 0.1;

struct BlobGeometry {
  double cx, cy, inv_ax2, inv_ay2, cos_a, sin_a;
  std::array<double, 3> color;
};

struct Frame {
  std::array<BlobGeometry, kBlobCount> blobs;
  std::array<double, 3> background;
};

Frame make_frame(std::span<const double> theta) {
  Frame f{};
  for (std::size_t b = 0; b < kBlobCount; ++b) {
    const double* p = theta.data() + b * kParamsPerBlob;
    const double ax = std::exp(p[2]);
    const double ay = std::exp(p[3]);
    f.blobs[b] = {p[0], p[1], 1.0 / (ax * ax), 1.0 / (ay * ay), std::cos(p[4]), std::sin(p[4]),
                  {sigmoid(p[5]), sigmoid(p[6]), sigmoid(p[7])}};
  }
  for (int c = 0; c < 3; ++c) f.background[c] = sigmoid(theta[kBgParam + c]);
  return f;
}

struct RenderCache {
  // Per pixel and blob: logit β(1 − q) of the soft indicator.
  std::vector<double> logits;
  std::vector<double> normalizer;
};

}  // namespace

ToyGenerator::ToyGenerator(GeneratorParams params) : params_(params) {
  if (params_.image_size < 8 || params_.image_size % 4 != 0)
    throw ConfigError("image_size must be a multiple of 4 and at least 8");
  if (params_.input_dim == 0) throw ConfigError("input_dim must be positive");
  if (!(params_.beta > 0.0)) throw ConfigError("beta must be positive");
  priority_ = kPriority;

  const double scale = params_.image_size / 64.0;
  const Palette& pal = template_palette();
  base_params_.assign(kRenderParamCount, 0.0);
  for (std::size_t b = 0; b < kBlobCount; ++b) {
    const Ellipse& e = kTemplate[b];
    double* p = base_params_.data() + b * kParamsPerBlob;
    p[0] = e.cx * scale;
    p[1] = e.cy * scale;
    p[2] = std::log(e.ax * scale);
    p[3] = std::log(e.ay * scale);
    p[4] = e.angle;
    for (int c = 0; c < 3; ++c) p[5 + c] = logit(pal.blob[b][c]);
  }
  for (int c = 0; c < 3; ++c) base_params_[kBgParam + c] = logit(pal.background[c]);

  using namespace style_index;
  Matrix& a = style_to_params_;
  a = Matrix(kRenderParamCount, kStyleDim);
  for (std::size_t b = 0; b < kBlobCount; ++b) {
    const Blob blob = static_cast<Blob>(b);
    a(param(blob, 0), translate_x) = scale;
    a(param(blob, 1), translate_y) = scale;
    if (blob != Blob::lips && blob != Blob::inner_mouth)
      for (std::size_t c = 0; c < 3; ++c) a(param(blob, 5 + c), brightness) = 0.15;
    const bool large = blob == Blob::skin || blob == Blob::hair;
    const std::size_t base = blob_base(blob);
    a(param(blob, 0), base + 0) = (large ? 1.0 : 0.8) * scale;
    a(param(blob, 1), base + 1) = (large ? 1.0 : 0.8) * scale;
    a(param(blob, 2), base + 2) = 0.06;
    a(param(blob, 3), base + 3) = 0.06;
    for (std::size_t c = 0; c < 3; ++c) a(param(blob, 5 + c), base + 4 + c) = 0.3;
  }
  a(param(Blob::skin, 2), face_scale) = 0.04;
  a(param(Blob::skin, 3), face_scale) = 0.04;
  a(param(Blob::hair, 2), face_scale) = 0.04;
  a(param(Blob::left_eye, 0), eye_spacing) = -0.7 * scale;
  a(param(Blob::right_eye, 0), eye_spacing) = 0.7 * scale;
  a(param(Blob::inner_mouth, 3), mouth_open) = 0.12;
  a(param(Blob::lips, 3), mouth_open) = 0.05;
  a(param(Blob::skin, 4), skin_rotation) = 0.06;
  a(param(Blob::lips, 4), mouth_rotation) = 0.06;
  a(param(Blob::inner_mouth, 4), mouth_rotation) = 0.06;
  for (std::size_t c = 0; c < 3; ++c) a(kBgParam + c, background + c) = 0.3;

  // Mapper: z ↦ B₂·tanh(B₁·z).
  const std::size_t d = params_.input_dim;
  CounterRng rng(params_.seed, "mapper");
  CounterRng mix_rng = rng.split("mixing");
  mapper_in_ = Matrix::identity(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) mapper_in_(i, j) += kMapperMixing * mix_rng.normal() / std::sqrt(double(d));

  CounterRng group_rng = rng.split("groups");
  CounterRng leak_rng = rng.split("leak");
  const auto& groups = mapper_groups();
  mapper_out_ = Matrix(kStyleDim, d);
  for (std::size_t j = 0; j < d; ++j) {
    const MapperGroup& g = groups[j % groups.size()];
    Vector w(g.entries.size());
    for (double& x : w) x = (group_rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.5 + group_rng.uniform());
    const double wn = norm(w);
    for (std::size_t k = 0; k < w.size(); ++k) mapper_out_(g.entries[k], j) += g.gain * w[k] / wn;
    for (std::size_t s = 0; s < kStyleDim; ++s) mapper_out_(s, j) += kMapperLeak * leak_rng.normal();
  }
}

Vector ToyGenerator::map_to_style(std::span<const double> z) const {
  if (z.size() != params_.input_dim) throw DimensionError("input code has wrong length");
  Vector h = mapper_in_ * z;
  for (double& v : h) v = std::tanh(v);
  return mapper_out_ * h;
}

Vector ToyGenerator::render_params(std::span<const double> style) const {
  if (style.size() != kStyleDim) throw DimensionError("style code has wrong length");
  return add(base_params_, style_to_params_ * style);
}

namespace {

// Renders from renderer parameters; optionally records what the pullback needs.
Vector render_values(std::span<const double> theta, int h, int w, double beta,
                     const std::array<double, kBlobCount>& priority, RenderCache* cache) {
  const Frame f = make_frame(theta);
  const std::size_t pixels = static_cast<std::size_t>(h) * w;
  Vector out(pixels * 3);
  if (cache) {
    cache->logits.assign(pixels * kBlobCount, 0.0);
    cache->normalizer.assign(pixels, 0.0);
  }
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const std::size_t p = static_cast<std::size_t>(row) * w + col;
      double z = kBackgroundPriority;
      double acc[3] = {kBackgroundPriority * f.background[0], kBackgroundPriority * f.background[1],
                       kBackgroundPriority * f.background[2]};
      for (std::size_t b = 0; b < kBlobCount; ++b) {
        const BlobGeometry& g = f.blobs[b];
        const double dx = col - g.cx;
        const double dy = row - g.cy;
        const double u1 = dx * g.cos_a + dy * g.sin_a;
        const double u2 = -dx * g.sin_a + dy * g.cos_a;
        const double s = beta * (1.0 - (u1 * u1 * g.inv_ax2 + u2 * u2 * g.inv_ay2));
        const double a = priority[b] * sigmoid(s);
        if (cache) cache->logits[p * kBlobCount + b] = s;
        z += a;
        for (int c = 0; c < 3; ++c) acc[c] += a * g.color[c];
      }
      if (cache) cache->normalizer[p] = z;
      for (int c = 0; c < 3; ++c) out[p * 3 + c] = snap_to_grid(acc[c] / z);
    }
  }
  return out;
}

}  // namespace

Image ToyGenerator::render(std::span<const double> style) const {
  const Vector theta = render_params(style);
  return Image(height(), width(), render_values(theta, height(), width(), params_.beta, priority_, nullptr));
}

Image ToyGenerator::generate(LatentSpace space, std::span<const double> code) const {
  if (space == LatentSpace::input) return render(map_to_style(code));
  return render(code);
}

Image ToyGenerator::generate(const LatentCode& code) const { return generate(code.spec.space, code.u); }

DiffMap ToyGenerator::mapper_map() const {
  auto self = std::make_shared<const ToyGenerator>(*this);
  return DiffMap(
      params_.input_dim, kStyleDim, [self](std::span<const double> z) { return self->map_to_style(z); },
      [self](std::span<const double> z) {
        Vector pre = self->mapper_in_ * z;
        Vector h(pre.size());
        Vector dh(pre.size());
        for (std::size_t i = 0; i < pre.size(); ++i) {
          h[i] = std::tanh(pre[i]);
          dh[i] = 1.0 - h[i] * h[i];
        }
        Vector value = self->mapper_out_ * h;
        return Linearization{std::move(value), [self, dh](std::span<const double> c) {
                               Vector gh = transpose_times(self->mapper_out_, c);
                               for (std::size_t i = 0; i < gh.size(); ++i) gh[i] *= dh[i];
                               return transpose_times(self->mapper_in_, gh);
                             }};
      },
      "mapper");
}

DiffMap ToyGenerator::renderer_map() const {
  auto self = std::make_shared<const ToyGenerator>(*this);
  const std::size_t out = image_dim();
  return DiffMap(
      kStyleDim, out, [self](std::span<const double> s) { return self->render(s).values; },
      [self](std::span<const double> s) {
        const Vector theta = self->render_params(s);
        auto cache = std::make_shared<RenderCache>();
        const int h = self->height();
        const int w = self->width();
        const double beta = self->params_.beta;
        Vector value = render_values(theta, h, w, beta, self->priority_, cache.get());
        auto frame = std::make_shared<const Frame>(make_frame(theta));
        auto image = std::make_shared<const Vector>(value);
        return Linearization{
            std::move(value), [self, cache, frame, image, h, w, beta](std::span<const double> g) {
              const Frame& f = *frame;
              const auto& prio = self->priority_;
              Vector gtheta(kRenderParamCount, 0.0);
              for (int row = 0; row < h; ++row) {
                for (int col = 0; col < w; ++col) {
                  const std::size_t p = static_cast<std::size_t>(row) * w + col;
                  const double g0 = g[p * 3], g1 = g[p * 3 + 1], g2 = g[p * 3 + 2];
                  if (g0 == 0.0 && g1 == 0.0 && g2 == 0.0) continue;
                  const double z = cache->normalizer[p];
                  const double gc[3] = {g0 / z, g1 / z, g2 / z};
                  const double* x = image->data() + p * 3;
                  for (int c = 0; c < 3; ++c) gtheta[kBgParam + c] += gc[c] * kBackgroundPriority;
                  for (std::size_t b = 0; b < kBlobCount; ++b) {
                    const double logit_s = cache->logits[p * kBlobCount + b];
                    const double wgt = sigmoid(logit_s);
                    const double a = prio[b] * wgt;
                    const BlobGeometry& bg = f.blobs[b];
                    double* gp = gtheta.data() + b * kParamsPerBlob;
                    double ga = 0.0;
                    for (int c = 0; c < 3; ++c) {
                      gp[5 + c] += gc[c] * a;  // times dcolor/dlogit, applied below
                      ga += gc[c] * (bg.color[c] - x[c]);
                    }
                    const double gs = ga * prio[b] * wgt * sigmoid(-logit_s);
                    if (gs == 0.0) continue;
                    const double gq = -beta * gs;
                    const double dx = col - bg.cx;
                    const double dy = row - bg.cy;
                    const double u1 = dx * bg.cos_a + dy * bg.sin_a;
                    const double u2 = -dx * bg.sin_a + dy * bg.cos_a;
                    const double t1 = 2.0 * u1 * bg.inv_ax2;
                    const double t2 = 2.0 * u2 * bg.inv_ay2;
                    gp[0] += gq * (-(t1 * bg.cos_a - t2 * bg.sin_a));
                    gp[1] += gq * (-(t1 * bg.sin_a + t2 * bg.cos_a));
                    gp[2] += gq * (-2.0 * u1 * u1 * bg.inv_ax2);
                    gp[3] += gq * (-2.0 * u2 * u2 * bg.inv_ay2);
                    gp[4] += gq * (t1 * u2 - t2 * u1);
                  }
                }
              }
              for (std::size_t b = 0; b < kBlobCount; ++b)
                for (int c = 0; c < 3; ++c) {
                  const double col = f.blobs[b].color[c];
                  gtheta[b * kParamsPerBlob + 5 + c] *= col * (1.0 - col);
                }
              for (int c = 0; c < 3; ++c) gtheta[kBgParam + c] *= f.background[c] * (1.0 - f.background[c]);
              return transpose_times(self->style_to_params_, gtheta);
            }};
      },
      "renderer");
}

DiffMap ToyGenerator::image_map(LatentSpace space) const {
  if (space == LatentSpace::style) return renderer_map().renamed("g_style");
  return compose(renderer_map(), mapper_map()).renamed("g_input");
}

std::vector<Vector> sample_codes(const ToyGenerator& gen, LatentSpace space, std::uint64_t seed,
                                 std::string_view stream, std::size_t count) {
  CounterRng rng(seed, stream);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng draw = rng.split("code" + std::to_string(i));
    Vector z = draw.normal_vector(gen.params().input_dim);
    out.push_back(space == LatentSpace::input ? std::move(z) : gen.map_to_style(z));
  }
  return out;
}

}  // namespace latent
