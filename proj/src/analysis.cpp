#include "latent/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "latent/error.hpp"
#include "latent/rng.hpp"

namespace latent {

std::string_view to_string(Label label) {
  static constexpr std::array<std::string_view, kLabelCount> names = {
      "skin", "left_eye", "right_eye", "nose", "inner_mouth", "lip", "hair", "background"};
  return names[static_cast<std::size_t>(label)];
}

std::string_view to_string(LandmarkRegion region) {
  static constexpr std::array<std::string_view, kLandmarkRegions> names = {"face", "left_eye", "right_eye",
                                                                          "nose", "mouth"};
  return names[static_cast<std::size_t>(region)];
}

std::vector<std::string> pixel_region_names() {
  return {"skin", "left_eye", "right_eye", "eye", "nose", "inner_mouth", "lip",
          "mouth", "hair", "background", "face", "all"};
}

PixelMask ParseResult::mask(std::string_view region) const {
  auto any_of = [&](std::initializer_list<Label> set) {
    PixelMask m(height, width);
    for (std::size_t p = 0; p < labels.size(); ++p)
      m.bits[p] = std::find(set.begin(), set.end(), labels[p]) != set.end() ? 1 : 0;
    return m;
  };
  for (std::size_t k = 0; k < kLabelCount; ++k)
    if (region == to_string(static_cast<Label>(k))) return any_of({static_cast<Label>(k)});
  if (region == "eye") return any_of({Label::left_eye, Label::right_eye});
  if (region == "mouth") return any_of({Label::inner_mouth, Label::lip});
  if (region == "face")
    return any_of({Label::skin, Label::left_eye, Label::right_eye, Label::nose, Label::inner_mouth, Label::lip});
  if (region == "all") return PixelMask(height, width, true);
  throw ConfigError("unknown pixel region '" + std::string(region) + "'");
}

LandmarkMask landmark_group(std::string_view name) {
  LandmarkMask m{std::vector<std::uint8_t>(kLandmarkCount, 0)};
  auto set_region = [&](LandmarkRegion r) {
    const std::size_t base = static_cast<std::size_t>(r) * kPointsPerRegion;
    for (std::size_t k = 0; k < kPointsPerRegion; ++k) m.bits[base + k] = 1;
  };
  if (name == "all") {
    std::fill(m.bits.begin(), m.bits.end(), 1);
    return m;
  }
  if (name == "eye") {
    set_region(LandmarkRegion::left_eye);
    set_region(LandmarkRegion::right_eye);
    return m;
  }
  for (std::size_t r = 0; r < kLandmarkRegions; ++r)
    if (name == to_string(static_cast<LandmarkRegion>(r))) {
      set_region(static_cast<LandmarkRegion>(r));
      return m;
    }
  throw ConfigError("unknown landmark group '" + std::string(name) + "'");
}

std::vector<std::string> landmark_group_names() {
  return {"face", "left_eye", "right_eye", "eye", "nose", "mouth", "all"};
}

namespace {

// Color classes of the soft assignment.
enum ColorClass : std::size_t { kSkin, kEye, kNose, kInner, kLip, kHair, kBackground, kClassCount };

std::array<std::array<double, 3>, kClassCount> prototypes() {
  const Palette& p = template_palette();
  return {{p.blob[static_cast<std::size_t>(Blob::skin)], p.blob[static_cast<std::size_t>(Blob::left_eye)],
           p.blob[static_cast<std::size_t>(Blob::nose)], p.blob[static_cast<std::size_t>(Blob::inner_mouth)],
           p.blob[static_cast<std::size_t>(Blob::lips)], p.blob[static_cast<std::size_t>(Blob::hair)], p.background}};
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Softmax over classes of −‖x − κ‖²/τ, per pixel.
std::vector<double> soft_assignment(std::span<const double> x, double tau) {
  const auto protos = prototypes();
  const std::size_t pixels = x.size() / 3;
  std::vector<double> prob(pixels * kClassCount);
  for (std::size_t p = 0; p < pixels; ++p) {
    double z[kClassCount];
    double zmax = -INFINITY;
    for (std::size_t k = 0; k < kClassCount; ++k) {
      double d = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double diff = x[p * 3 + c] - protos[k][c];
        d += diff * diff;
      }
      z[k] = -d / tau;
      zmax = std::max(zmax, z[k]);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < kClassCount; ++k) {
      z[k] = std::exp(z[k] - zmax);
      sum += z[k];
    }
    for (std::size_t k = 0; k < kClassCount; ++k) prob[p * kClassCount + k] = z[k] / sum;
  }
  return prob;
}

/// Accumulates the input gradient of the soft assignment given ∂L/∂P.
void soft_assignment_pullback(std::span<const double> x, const std::vector<double>& prob,
                              const std::vector<double>& gprob, double tau, Vector& gx) {
  const auto protos = prototypes();
  const std::size_t pixels = x.size() / 3;
  for (std::size_t p = 0; p < pixels; ++p) {
    const double* P = prob.data() + p * kClassCount;
    const double* G = gprob.data() + p * kClassCount;
    double mean = 0.0;
    for (std::size_t k = 0; k < kClassCount; ++k) mean += P[k] * G[k];
    for (std::size_t k = 0; k < kClassCount; ++k) {
      const double gz = P[k] * (G[k] - mean);
      if (gz == 0.0) continue;
      for (int c = 0; c < 3; ++c) gx[p * 3 + c] += gz * (-2.0 * (x[p * 3 + c] - protos[k][c]) / tau);
    }
  }
}

struct Moments {
  double total = 0.0;
  double mx = 0.0, my = 0.0;
  double cxx = 0.0, cxy = 0.0, cyy = 0.0;
  double l1 = 0.0, l2 = 0.0;
  double e1x = 1.0, e1y = 0.0;
};

constexpr std::array<std::array<double, 2>, kLandmarkRegions> kAxisReference = {{
    {1.0, 1.0},  // face: diagonal, the face may be near round
    {1.0, 0.0},  // left eye
    {1.0, 0.0},  // right eye
    {0.0, 1.0},  // nose
    {1.0, 0.0},  // mouth
}};

constexpr double kEndpointScale = 1.5;

// Region weights are cubed class probabilities, which keeps the faint
// far-field tail of the soft assignment out of the moments.
double sharpen(double p) { return p * p * p; }
double sharpen_derivative(double p) { return 3.0 * p * p; }
constexpr double kSplitSoftness = 0.5;

Moments compute_moments(const std::vector<double>& w, int width, LandmarkRegion region) {
  Moments m;
  double sx = 0.0, sy = 0.0;
  for (std::size_t p = 0; p < w.size(); ++p) {
    m.total += w[p];
    sx += w[p] * static_cast<double>(p % width);
    sy += w[p] * static_cast<double>(p / width);
  }
  if (!(m.total >= 1e-9)) throw DegenerateLandmarkError(std::string(to_string(region)));
  m.mx = sx / m.total;
  m.my = sy / m.total;
  for (std::size_t p = 0; p < w.size(); ++p) {
    const double dx = static_cast<double>(p % width) - m.mx;
    const double dy = static_cast<double>(p / width) - m.my;
    m.cxx += w[p] * dx * dx;
    m.cxy += w[p] * dx * dy;
    m.cyy += w[p] * dy * dy;
  }
  m.cxx /= m.total;
  m.cxy /= m.total;
  m.cyy /= m.total;
  const double half = 0.5 * (m.cxx - m.cyy);
  const double r = std::hypot(half, m.cxy);
  const double mean = 0.5 * (m.cxx + m.cyy);
  m.l1 = mean + r;
  m.l2 = mean - r;
  if (!(m.l2 > 0.0) || !(r > 0.0))
    throw NumericError("landmark region '" + std::string(to_string(region)) + "' has a degenerate second moment");
  const double theta = 0.5 * std::atan2(m.cxy, half);
  m.e1x = std::cos(theta);
  m.e1y = std::sin(theta);
  const auto& ref = kAxisReference[static_cast<std::size_t>(region)];
  if (m.e1x * ref[0] + m.e1y * ref[1] < 0.0) {
    m.e1x = -m.e1x;
    m.e1y = -m.e1y;
  }
  return m;
}

void write_landmarks(const Moments& m, double* out) {
  const double a = kEndpointScale * std::sqrt(m.l1);
  const double b = kEndpointScale * std::sqrt(m.l2);
  const double e2x = -m.e1y, e2y = m.e1x;
  out[0] = m.mx;
  out[1] = m.my;
  out[2] = m.mx + a * m.e1x;
  out[3] = m.my + a * m.e1y;
  out[4] = m.mx - a * m.e1x;
  out[5] = m.my - a * m.e1y;
  out[6] = m.mx + b * e2x;
  out[7] = m.my + b * e2y;
  out[8] = m.mx - b * e2x;
  out[9] = m.my - b * e2y;
}

struct DetectorState {
  std::vector<double> prob;
  std::array<std::vector<double>, kLandmarkRegions> weights;
  std::vector<double> split_left;
  std::vector<double> split_right;
  std::array<Moments, kLandmarkRegions> moments;
  Vector landmarks;
};

DetectorState detect(std::span<const double> x, int width, double tau) {
  DetectorState s;
  const std::size_t pixels = x.size() / 3;
  s.prob = soft_assignment(x, tau);
  for (auto& w : s.weights) w.assign(pixels, 0.0);
  auto& face = s.weights[static_cast<std::size_t>(LandmarkRegion::face)];
  auto& nose = s.weights[static_cast<std::size_t>(LandmarkRegion::nose)];
  auto& mouth = s.weights[static_cast<std::size_t>(LandmarkRegion::mouth)];
  for (std::size_t p = 0; p < pixels; ++p) {
    const double* P = s.prob.data() + p * kClassCount;
    face[p] = sharpen(P[kSkin] + P[kEye] + P[kNose] + P[kInner] + P[kLip]);
    nose[p] = sharpen(P[kNose]);
    mouth[p] = sharpen(P[kInner] + P[kLip]);
  }
  s.moments[0] = compute_moments(face, width, LandmarkRegion::face);
  const double center_x = s.moments[0].mx;
  s.split_left.resize(pixels);
  s.split_right.resize(pixels);
  auto& left = s.weights[static_cast<std::size_t>(LandmarkRegion::left_eye)];
  auto& right = s.weights[static_cast<std::size_t>(LandmarkRegion::right_eye)];
  for (std::size_t p = 0; p < pixels; ++p) {
    const double t = (center_x - static_cast<double>(p % width)) / kSplitSoftness;
    s.split_left[p] = sigmoid(t);
    s.split_right[p] = sigmoid(-t);
    const double eye = sharpen(s.prob[p * kClassCount + kEye]);
    left[p] = eye * s.split_left[p];
    right[p] = eye * s.split_right[p];
  }
  for (std::size_t r = 1; r < kLandmarkRegions; ++r)
    s.moments[r] = compute_moments(s.weights[r], width, static_cast<LandmarkRegion>(r));
  s.landmarks.assign(2 * kLandmarkCount, 0.0);
  for (std::size_t r = 0; r < kLandmarkRegions; ++r)
    write_landmarks(s.moments[r], s.landmarks.data() + r * kPointsPerRegion * 2);
  return s;
}

/// ∂L/∂w per pixel for one region given cotangents on its five points and an
/// extra centroid cotangent.
std::vector<double> region_weight_gradient(const Moments& m, const double* g, double extra_gmx, double extra_gmy,
                                           std::size_t pixels, int width) {
  const double sl1 = std::sqrt(m.l1);
  const double sl2 = std::sqrt(m.l2);
  const double e1x = m.e1x, e1y = m.e1y;
  const double e2x = -e1y, e2y = e1x;

  double gmx = extra_gmx, gmy = extra_gmy;
  for (std::size_t k = 0; k < kPointsPerRegion; ++k) {
    gmx += g[2 * k];
    gmy += g[2 * k + 1];
  }
  const double d1x = g[2] - g[4], d1y = g[3] - g[5];
  const double d2x = g[6] - g[8], d2y = g[7] - g[9];
  const double gl1 = (d1x * e1x + d1y * e1y) * kEndpointScale / (2.0 * sl1);
  const double gl2 = (d2x * e2x + d2y * e2y) * kEndpointScale / (2.0 * sl2);
  double ge1x = kEndpointScale * sl1 * d1x;
  double ge1y = kEndpointScale * sl1 * d1y;
  // e2 = R·e1 with R the +90° rotation, so ∂L/∂e1 gains Rᵀ·∂L/∂e2.
  const double ge2x = kEndpointScale * sl2 * d2x;
  const double ge2y = kEndpointScale * sl2 * d2y;
  ge1x += ge2y;
  ge1y += -ge2x;
  const double k = (ge1x * e2x + ge1y * e2y) / (m.l1 - m.l2);
  // Symmetric ∂L/∂C.
  const double axx = gl1 * e1x * e1x + gl2 * e2x * e2x + k * e1x * e2x;
  const double ayy = gl1 * e1y * e1y + gl2 * e2y * e2y + k * e1y * e2y;
  const double axy = gl1 * e1x * e1y + gl2 * e2x * e2y + 0.5 * k * (e1x * e2y + e2x * e1y);

  std::vector<double> gw(pixels);
  for (std::size_t p = 0; p < pixels; ++p) {
    const double dx = static_cast<double>(p % width) - m.mx;
    const double dy = static_cast<double>(p / width) - m.my;
    gw[p] = (dx * gmx + dy * gmy + axx * (dx * dx - m.cxx) + 2.0 * axy * (dx * dy - m.cxy) +
             ayy * (dy * dy - m.cyy)) /
            m.total;
  }
  return gw;
}

Vector detector_pullback(const DetectorState& s, std::span<const double> x, std::span<const double> g, int width,
                         double tau) {
  const std::size_t pixels = x.size() / 3;
  auto region_g = [&](LandmarkRegion r) { return g.data() + static_cast<std::size_t>(r) * kPointsPerRegion * 2; };
  auto idx = [](LandmarkRegion r) { return static_cast<std::size_t>(r); };

  const auto gw_left = region_weight_gradient(s.moments[idx(LandmarkRegion::left_eye)],
                                              region_g(LandmarkRegion::left_eye), 0, 0, pixels, width);
  const auto gw_right = region_weight_gradient(s.moments[idx(LandmarkRegion::right_eye)],
                                               region_g(LandmarkRegion::right_eye), 0, 0, pixels, width);
  double g_center = 0.0;
  for (std::size_t p = 0; p < pixels; ++p) {
    const double eye = sharpen(s.prob[p * kClassCount + kEye]);
    g_center += eye * s.split_left[p] * s.split_right[p] / kSplitSoftness * (gw_left[p] - gw_right[p]);
  }
  const auto gw_face = region_weight_gradient(s.moments[idx(LandmarkRegion::face)], region_g(LandmarkRegion::face),
                                              g_center, 0, pixels, width);
  const auto gw_nose = region_weight_gradient(s.moments[idx(LandmarkRegion::nose)], region_g(LandmarkRegion::nose),
                                              0, 0, pixels, width);
  const auto gw_mouth = region_weight_gradient(s.moments[idx(LandmarkRegion::mouth)],
                                               region_g(LandmarkRegion::mouth), 0, 0, pixels, width);

  std::vector<double> gprob(pixels * kClassCount, 0.0);
  for (std::size_t p = 0; p < pixels; ++p) {
    double* G = gprob.data() + p * kClassCount;
    const double* P = s.prob.data() + p * kClassCount;
    const double gf = gw_face[p] * sharpen_derivative(P[kSkin] + P[kEye] + P[kNose] + P[kInner] + P[kLip]);
    const double gm = gw_mouth[p] * sharpen_derivative(P[kInner] + P[kLip]);
    G[kSkin] += gf;
    G[kEye] += gf + (gw_left[p] * s.split_left[p] + gw_right[p] * s.split_right[p]) * sharpen_derivative(P[kEye]);
    G[kNose] += gf + gw_nose[p] * sharpen_derivative(P[kNose]);
    G[kInner] += gf + gm;
    G[kLip] += gf + gm;
  }
  Vector gx(x.size(), 0.0);
  soft_assignment_pullback(x, s.prob, gprob, tau, gx);
  return gx;
}

void check_image_length(std::span<const double> x, std::size_t expected, const char* who) {
  if (x.size() != expected) throw DimensionError(std::string(who) + ": image has wrong size");
}

}  // namespace

AnalysisModels::AnalysisModels(AnalysisParams params) : params_(params) {
  if (params_.image_size < 8 || params_.image_size % 4 != 0)
    throw ConfigError("image_size must be a multiple of 4 and at least 8");
  if (!(params_.tau > 0.0)) throw ConfigError("tau must be positive");
  const std::size_t cells = image_dim() / 16;
  CounterRng rng(params_.seed, "identity");
  identity_projection_ = Matrix(kIdentityDim, cells);
  for (double& v : identity_projection_.data()) v = rng.normal() / std::sqrt(static_cast<double>(cells));
}

ParseResult AnalysisModels::parse(const Image& image) const {
  const auto protos = prototypes();
  const double scale = params_.image_size / 64.0;
  const double eye_x[2] = {24.2 * scale, 39.9 * scale};
  const double sigma = 6.0 * scale;
  ParseResult out{image.height, image.width, std::vector<Label>(image.pixel_count())};
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    double score[kClassCount];
    for (std::size_t k = 0; k < kClassCount; ++k) {
      double d = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double diff = image.values[p * 3 + c] - protos[k][c];
        d += diff * diff;
      }
      score[k] = -d / params_.tau;
    }
    const double col = static_cast<double>(p % image.width);
    const double labelled[kLabelCount] = {
        score[kSkin],
        score[kEye] - (col - eye_x[0]) * (col - eye_x[0]) / (2 * sigma * sigma),
        score[kEye] - (col - eye_x[1]) * (col - eye_x[1]) / (2 * sigma * sigma),
        score[kNose],
        score[kInner],
        score[kLip],
        score[kHair],
        score[kBackground],
    };
    out.labels[p] = static_cast<Label>(std::max_element(labelled, labelled + kLabelCount) - labelled);
  }
  return out;
}

DiffMap AnalysisModels::landmark_detector() const {
  const int width = params_.image_size;
  const double tau = params_.tau;
  const std::size_t in = image_dim();
  return DiffMap(
      in, 2 * kLandmarkCount,
      [width, tau, in](std::span<const double> x) {
        check_image_length(x, in, "landmark_detector");
        return detect(x, width, tau).landmarks;
      },
      [width, tau, in](std::span<const double> x) {
        check_image_length(x, in, "landmark_detector");
        auto state = std::make_shared<const DetectorState>(detect(x, width, tau));
        auto image = std::make_shared<const Vector>(x.begin(), x.end());
        return Linearization{state->landmarks, [state, image, width, tau](std::span<const double> g) {
                               return detector_pullback(*state, *image, g, width, tau);
                             }};
      },
      "f_fl");
}

DiffMap AnalysisModels::identity_embedder() const {
  auto proj = std::make_shared<const Matrix>(identity_projection_);
  const int size = params_.image_size;
  const int cells_side = size / 4;
  const std::size_t in = image_dim();

  struct Forward {
    Vector out;
    double norm_y;
  };
  auto pooled_centered = [size, cells_side](std::span<const double> x) {
    Vector f(static_cast<std::size_t>(cells_side) * cells_side * 3, 0.0);
    for (int row = 0; row < size; ++row)
      for (int col = 0; col < size; ++col)
        for (int c = 0; c < 3; ++c)
          f[((row / 4) * cells_side + col / 4) * 3 + c] += x[(static_cast<std::size_t>(row) * size + col) * 3 + c] / 16.0;
    double mean = 0.0;
    for (double v : f) mean += v;
    mean /= static_cast<double>(f.size());
    for (double& v : f) v -= mean;
    return f;
  };
  auto forward = [proj, pooled_centered](std::span<const double> x) {
    const Vector y = (*proj) * pooled_centered(x);
    const double ny = norm(y);
    if (!(ny > 1e-300)) throw NumericError("identity embedder: centered pooled features vanish");
    return Forward{scaled(y, 1.0 / ny), ny};
  };
  return DiffMap(
      in, kIdentityDim,
      [forward, in](std::span<const double> x) {
        check_image_length(x, in, "identity_embedder");
        return forward(x).out;
      },
      [forward, proj, size, cells_side, in](std::span<const double> x) {
        check_image_length(x, in, "identity_embedder");
        Forward fw = forward(x);
        const Vector out = fw.out;
        const double ny = fw.norm_y;
        return Linearization{std::move(fw.out), [out, ny, proj, size, cells_side](std::span<const double> g) {
                               const double og = dot(out, g);
                               Vector gy(g.size());
                               for (std::size_t i = 0; i < g.size(); ++i) gy[i] = (g[i] - out[i] * og) / ny;
                               Vector gf = transpose_times(*proj, gy);
                               double mean = 0.0;
                               for (double v : gf) mean += v;
                               mean /= static_cast<double>(gf.size());
                               for (double& v : gf) v -= mean;
                               Vector gx(static_cast<std::size_t>(size) * size * 3);
                               for (int row = 0; row < size; ++row)
                                 for (int col = 0; col < size; ++col)
                                   for (int c = 0; c < 3; ++c)
                                     gx[(static_cast<std::size_t>(row) * size + col) * 3 + c] =
                                         gf[((row / 4) * cells_side + col / 4) * 3 + c] / 16.0;
                               return gx;
                             }};
      },
      "f_id");
}

std::vector<std::string> AnalysisModels::classifier_names() { return {"lip_redness", "eye_area", "mouth_curvature"}; }

std::array<int, 4> AnalysisModels::lip_window() const {
  const double s = params_.image_size / 64.0;
  return {static_cast<int>(std::lround(42 * s)), static_cast<int>(std::lround(50 * s)),
          static_cast<int>(std::lround(23 * s)), static_cast<int>(std::lround(41 * s))};
}

DiffMap AnalysisModels::classifier(std::string_view name) const {
  const int size = params_.image_size;
  const std::size_t in = image_dim();
  const double area_scale = (64.0 * 64.0) / (static_cast<double>(size) * size);

  if (name == "lip_redness") {
    const auto win = lip_window();
    const double n = static_cast<double>((win[1] - win[0]) * (win[3] - win[2]));
    constexpr double kBias = -8.0;
    auto feature = [win, size, n](std::span<const double> x) {
      double s = 0.0;
      for (int row = win[0]; row < win[1]; ++row)
        for (int col = win[2]; col < win[3]; ++col) {
          const double* px = x.data() + (static_cast<std::size_t>(row) * size + col) * 3;
          s += px[0] - 0.5 * (px[1] + px[2]);
        }
      return s / n;
    };
    return DiffMap(
        in, 1,
        [feature, in](std::span<const double> x) {
          check_image_length(x, in, "lip_redness");
          return Vector{kLipRednessScale * feature(x) + kBias};
        },
        [feature, in, win, size, n](std::span<const double> x) {
          check_image_length(x, in, "lip_redness");
          return Linearization{Vector{kLipRednessScale * feature(x) + kBias},
                               [win, size, n, in](std::span<const double> g) {
                                 Vector gx(in, 0.0);
                                 const double k = g[0] * kLipRednessScale / n;
                                 for (int row = win[0]; row < win[1]; ++row)
                                   for (int col = win[2]; col < win[3]; ++col) {
                                     double* px = gx.data() + (static_cast<std::size_t>(row) * size + col) * 3;
                                     px[0] = k;
                                     px[1] = -0.5 * k;
                                     px[2] = -0.5 * k;
                                   }
                                 return gx;
                               }};
        },
        "lip_redness");
  }

  if (name == "eye_area") {
    const double tau = params_.tau;
    const double scale = 0.05 * area_scale;
    constexpr double kBias = -3.5;
    auto value = [tau, scale](std::span<const double> x, const std::vector<double>& prob) {
      double s = 0.0;
      for (std::size_t p = 0; p < x.size() / 3; ++p) s += prob[p * kClassCount + kEye];
      return Vector{scale * s + kBias};
    };
    return DiffMap(
        in, 1,
        [value, tau, in](std::span<const double> x) {
          check_image_length(x, in, "eye_area");
          return value(x, soft_assignment(x, tau));
        },
        [value, tau, scale, in](std::span<const double> x) {
          check_image_length(x, in, "eye_area");
          auto prob = std::make_shared<const std::vector<double>>(soft_assignment(x, tau));
          auto image = std::make_shared<const Vector>(x.begin(), x.end());
          return Linearization{value(x, *prob), [prob, image, tau, scale](std::span<const double> g) {
                                 const std::size_t pixels = image->size() / 3;
                                 std::vector<double> gprob(pixels * kClassCount, 0.0);
                                 for (std::size_t p = 0; p < pixels; ++p) gprob[p * kClassCount + kEye] = g[0] * scale;
                                 Vector gx(image->size(), 0.0);
                                 soft_assignment_pullback(*image, *prob, gprob, tau, gx);
                                 return gx;
                               }};
        },
        "eye_area");
  }

  if (name == "mouth_curvature") {
    // Width² minus weighted height² of the detected mouth, in 64-px units.
    const std::size_t base = static_cast<std::size_t>(LandmarkRegion::mouth) * kPointsPerRegion * 2;
    auto quad = [base, area_scale](std::span<const double> q) {
      const double wx = q[base + 2] - q[base + 4], wy = q[base + 3] - q[base + 5];
      const double hx = q[base + 6] - q[base + 8], hy = q[base + 7] - q[base + 9];
      return area_scale * (0.01 * (wx * wx + wy * wy) - 0.04 * (hx * hx + hy * hy));
    };
    DiffMap functional(
        2 * kLandmarkCount, 1, [quad](std::span<const double> q) { return Vector{quad(q)}; },
        [quad, base, area_scale](std::span<const double> q) {
          Vector qq(q.begin(), q.end());
          return Linearization{Vector{quad(q)}, [qq, base, area_scale](std::span<const double> g) {
                                 Vector gq(qq.size(), 0.0);
                                 const double wx = qq[base + 2] - qq[base + 4], wy = qq[base + 3] - qq[base + 5];
                                 const double hx = qq[base + 6] - qq[base + 8], hy = qq[base + 7] - qq[base + 9];
                                 const double kw = g[0] * area_scale * 0.02;
                                 const double kh = -g[0] * area_scale * 0.08;
                                 gq[base + 2] = kw * wx;
                                 gq[base + 4] = -kw * wx;
                                 gq[base + 3] = kw * wy;
                                 gq[base + 5] = -kw * wy;
                                 gq[base + 6] = kh * hx;
                                 gq[base + 8] = -kh * hx;
                                 gq[base + 7] = kh * hy;
                                 gq[base + 9] = -kh * hy;
                                 return gq;
                               }};
        },
        "mouth_quadratic");
    return compose(functional, landmark_detector()).renamed("mouth_curvature");
  }

  throw ConfigError("unknown classifier '" + std::string(name) + "'");
}

}  // namespace latent
