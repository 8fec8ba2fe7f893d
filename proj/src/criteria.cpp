#include "latent/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <utility>

#include "latent/error.hpp"
#include "latent/rng.hpp"

namespace latent {

namespace {

void check_mask(const DiffMap& image_map, const PixelMask& mask, const char* who) {
  if (mask.bits.size() * 3 != image_map.out_dim())
    throw DimensionError(std::string(who) + ": mask size does not match the generator output");
}

}  // namespace

DiffMap masked_photometry(const DiffMap& image_map, const PixelMask& mask) {
  check_mask(image_map, mask, "masked_photometry");
  auto bits = std::make_shared<const std::vector<std::uint8_t>>(mask.bits);
  const std::size_t n = image_map.out_dim();
  auto apply = [bits](std::span<const double> x) {
    Vector y(x.size(), 0.0);
    for (std::size_t p = 0; p < bits->size(); ++p)
      if ((*bits)[p])
        for (int c = 0; c < 3; ++c) y[p * 3 + c] = x[p * 3 + c];
    return y;
  };
  DiffMap masking(
      n, n, apply, [apply](std::span<const double> x) { return Linearization{apply(x), apply}; }, "mask");
  return compose(masking, image_map).renamed("h_mp");
}

DiffMap landmark_criterion(const DiffMap& image_map, const DiffMap& detector, const LandmarkMask& selection) {
  if (selection.bits.size() * 2 != detector.out_dim())
    throw DimensionError("landmark_criterion: selection length does not match the detector");
  std::vector<std::size_t> indices;
  for (std::size_t k = 0; k < selection.bits.size(); ++k)
    if (selection.bits[k]) {
      indices.push_back(2 * k);
      indices.push_back(2 * k + 1);
    }
  if (indices.empty()) throw ConfigError("landmark_criterion: empty landmark selection");
  return select(compose(detector, image_map), std::move(indices), "h_fl");
}

// ---------------------------------------------------------------------------
// Delaunay

namespace {

struct Tri {
  std::size_t a, b, c;
};

double orient(const double* p, const double* q, const double* r) {
  return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
}

// > 0 when d lies strictly inside the circumcircle of the counter-clockwise triangle (a, b, c).
double in_circle(const double* a, const double* b, const double* c, const double* d) {
  const double adx = a[0] - d[0], ady = a[1] - d[1];
  const double bdx = b[0] - d[0], bdy = b[1] - d[1];
  const double cdx = c[0] - d[0], cdy = c[1] - d[1];
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

}  // namespace

DelaunayMesh triangulate(std::span<const double> points) {
  if (points.size() % 2 != 0) throw DimensionError("triangulate: odd coordinate count");
  const std::size_t n = points.size() / 2;
  if (n < 3) throw NumericError("triangulate: need at least three points");

  double xmin = points[0], xmax = points[0], ymin = points[1], ymax = points[1];
  for (std::size_t i = 0; i < n; ++i) {
    xmin = std::min(xmin, points[2 * i]);
    xmax = std::max(xmax, points[2 * i]);
    ymin = std::min(ymin, points[2 * i + 1]);
    ymax = std::max(ymax, points[2 * i + 1]);
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1.0});
  const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);

  std::vector<double> pts(points.begin(), points.end());
  const double big = 1e4 * span;
  pts.insert(pts.end(), {cx - big, cy - big, cx + big, cy - big, cx, cy + big});
  auto P = [&](std::size_t i) { return pts.data() + 2 * i; };

  std::vector<Tri> tris = {{n, n + 1, n + 2}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Tri> keep;
    std::map<std::pair<std::size_t, std::size_t>, int> edges;
    for (const Tri& t : tris) {
      if (in_circle(P(t.a), P(t.b), P(t.c), P(i)) > 0.0) {
        for (auto e : {std::pair{t.a, t.b}, std::pair{t.b, t.c}, std::pair{t.c, t.a}})
          ++edges[{std::min(e.first, e.second), std::max(e.first, e.second)}];
      } else {
        keep.push_back(t);
      }
    }
    for (const Tri& t : tris) {
      if (in_circle(P(t.a), P(t.b), P(t.c), P(i)) <= 0.0) continue;
      for (auto e : {std::pair{t.a, t.b}, std::pair{t.b, t.c}, std::pair{t.c, t.a}}) {
        if (edges[{std::min(e.first, e.second), std::max(e.first, e.second)}] != 1) continue;
        keep.push_back({e.first, e.second, i});
      }
    }
    tris = std::move(keep);
  }

  DelaunayMesh mesh;
  mesh.landmark_count = n;
  for (const Tri& t : tris) {
    if (t.a >= n || t.b >= n || t.c >= n) continue;
    if (0.5 * orient(P(t.a), P(t.b), P(t.c)) <= 1e-6) continue;
    mesh.facets.push_back({t.a, t.b, t.c});
  }
  if (mesh.facets.empty()) throw NumericError("triangulate: points are collinear");
  std::sort(mesh.facets.begin(), mesh.facets.end());
  return mesh;
}

std::array<double, 2> bary_point(std::span<const double> landmarks, const DelaunayMesh& mesh, std::size_t facet,
                                 const std::array<double, 3>& c) {
  if (facet >= mesh.facets.size()) throw DimensionError("bary_point: facet index out of range");
  const auto& f = mesh.facets[facet];
  std::array<double, 2> out{0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    if (2 * f[k] + 1 >= landmarks.size()) throw DimensionError("bary_point: landmark index out of range");
    out[0] += c[k] * landmarks[2 * f[k]];
    out[1] += c[k] * landmarks[2 * f[k] + 1];
  }
  return out;
}

double facet_area(std::span<const double> landmarks, const DelaunayMesh& mesh, std::size_t facet) {
  const auto& f = mesh.facets.at(facet);
  return 0.5 * std::abs(orient(&landmarks[2 * f[0]], &landmarks[2 * f[1]], &landmarks[2 * f[2]]));
}

BarySampleSet bary_samples(const DelaunayMesh& mesh, std::span<const double> landmarks, std::uint64_t seed) {
  // R2 sequence increments from the plastic number.
  constexpr double g = 1.32471795724474602596;
  constexpr double a1 = 1.0 / g;
  constexpr double a2 = 1.0 / (g * g);
  BarySampleSet out;
  CounterRng rng(seed, "bary");
  for (std::size_t i = 0; i < mesh.facets.size(); ++i) {
    const auto count = static_cast<std::size_t>(std::ceil(facet_area(landmarks, mesh, i) / 2.0));
    const double o1 = rng.uniform();
    const double o2 = rng.uniform();
    for (std::size_t k = 0; k < count; ++k) {
      double r1 = std::fmod(o1 + a1 * static_cast<double>(k + 1), 1.0);
      double r2 = std::fmod(o2 + a2 * static_cast<double>(k + 1), 1.0);
      if (r1 + r2 > 1.0) {
        r1 = 1.0 - r1;
        r2 = 1.0 - r2;
      }
      out.push_back({i, {1.0 - r1 - r2, r1, r2}});
    }
  }
  return out;
}

BarySampleSet filter_samples(const BarySampleSet& samples, const DelaunayMesh& mesh,
                             std::span<const double> landmarks, const PixelMask& mask) {
  BarySampleSet out;
  for (const auto& s : samples) {
    const auto p = bary_point(landmarks, mesh, s.facet, s.c);
    const long col = std::lround(p[0]);
    const long row = std::lround(p[1]);
    if (col < 0 || row < 0 || col >= mask.width || row >= mask.height) continue;
    if (mask.test(static_cast<std::size_t>(row) * mask.width + col)) out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bilinear sampling and aligned photometry

namespace {

struct BilinearStencil {
  std::size_t idx[4];
  double w[4];
  // ∂w/∂x and ∂w/∂y; zero where the coordinate was clamped.
  double wx[4];
  double wy[4];
};

BilinearStencil stencil(int height, int width, double x, double y) {
  const double lo = 0.5;
  const bool clamp_x = x < lo || x > width - 1.5;
  const bool clamp_y = y < lo || y > height - 1.5;
  x = std::clamp(x, lo, width - 1.5);
  y = std::clamp(y, lo, height - 1.5);
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0, fy = y - y0;
  BilinearStencil s;
  const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
  const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
  const double wxs[4] = {1 - fx, fx, 1 - fx, fx};
  const double wys[4] = {1 - fy, 1 - fy, fy, fy};
  const double dwx[4] = {-1, 1, -1, 1};
  const double dwy[4] = {-1, -1, 1, 1};
  for (int k = 0; k < 4; ++k) {
    s.idx[k] = (static_cast<std::size_t>(ys[k]) * width + xs[k]) * 3;
    s.w[k] = wxs[k] * wys[k];
    s.wx[k] = clamp_x ? 0.0 : dwx[k] * wys[k];
    s.wy[k] = clamp_y ? 0.0 : wxs[k] * dwy[k];
  }
  return s;
}

}  // namespace

std::array<double, 3> bilinear_sample(std::span<const double> image, int height, int width, double x, double y) {
  const auto s = stencil(height, width, x, y);
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (int k = 0; k < 4; ++k)
    for (int c = 0; c < 3; ++c) out[c] += s.w[k] * image[s.idx[k] + c];
  return out;
}

DiffMap aligned_photometry_image(const DiffMap& detector, const DelaunayMesh& mesh, const BarySampleSet& samples,
                                 int height, int width) {
  if (samples.empty()) throw ConfigError("aligned_photometry: no samples");
  for (const auto& s : samples)
    if (s.facet >= mesh.facets.size()) throw DimensionError("aligned_photometry: sample facet out of range");
  auto m = std::make_shared<const DelaunayMesh>(mesh);
  auto set = std::make_shared<const BarySampleSet>(samples);
  const std::size_t in = static_cast<std::size_t>(height) * width * 3;
  const std::size_t out = 3 * samples.size();

  auto sample_all = [m, set, height, width](std::span<const double> x, std::span<const double> q) {
    Vector v(3 * set->size());
    std::vector<BilinearStencil> st(set->size());
    for (std::size_t j = 0; j < set->size(); ++j) {
      const auto p = bary_point(q, *m, (*set)[j].facet, (*set)[j].c);
      st[j] = stencil(height, width, p[0], p[1]);
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += st[j].w[k] * x[st[j].idx[k] + c];
        v[3 * j + c] = acc;
      }
    }
    return std::make_pair(std::move(v), std::move(st));
  };

  return DiffMap(
      in, out,
      [detector, sample_all](std::span<const double> x) { return sample_all(x, detector.evaluate(x)).first; },
      [detector, sample_all, m, set, in](std::span<const double> x) {
        Linearization lin = detector.linearize(x);
        auto [value, st] = sample_all(x, lin.value);
        auto stencils = std::make_shared<const std::vector<BilinearStencil>>(std::move(st));
        auto image = std::make_shared<const Vector>(x.begin(), x.end());
        auto det_pullback = lin.pullback;
        const std::size_t qdim = lin.value.size();
        return Linearization{
            std::move(value), [stencils, image, det_pullback, m, set, in, qdim](std::span<const double> g) {
              Vector gx(in, 0.0);
              Vector gq(qdim, 0.0);
              bool any_q = false;
              for (std::size_t j = 0; j < set->size(); ++j) {
                const auto& s = (*stencils)[j];
                double gpx = 0.0, gpy = 0.0;
                for (int k = 0; k < 4; ++k) {
                  for (int c = 0; c < 3; ++c) {
                    const double gc = g[3 * j + c];
                    gx[s.idx[k] + c] += s.w[k] * gc;
                    gpx += s.wx[k] * (*image)[s.idx[k] + c] * gc;
                    gpy += s.wy[k] * (*image)[s.idx[k] + c] * gc;
                  }
                }
                if (gpx == 0.0 && gpy == 0.0) continue;
                any_q = true;
                const auto& f = m->facets[(*set)[j].facet];
                for (int k = 0; k < 3; ++k) {
                  gq[2 * f[k]] += (*set)[j].c[k] * gpx;
                  gq[2 * f[k] + 1] += (*set)[j].c[k] * gpy;
                }
              }
              if (any_q) {
                const Vector gd = det_pullback(gq);
                for (std::size_t i = 0; i < in; ++i) gx[i] += gd[i];
              }
              return gx;
            }};
      },
      "ap_sample");
}

DiffMap aligned_photometry(const DiffMap& image_map, const DiffMap& detector, const DelaunayMesh& mesh,
                           const BarySampleSet& samples, int height, int width) {
  return compose(aligned_photometry_image(detector, mesh, samples, height, width), image_map).renamed("h_ap");
}

DiffMap identity_criterion(const DiffMap& image_map, const DiffMap& embedder) {
  return compose(embedder, image_map).renamed("h_id");
}

// ---------------------------------------------------------------------------
// Masked color statistics

namespace {

std::vector<std::size_t> mask_pixels(const PixelMask& mask) {
  std::vector<std::size_t> px;
  for (std::size_t p = 0; p < mask.bits.size(); ++p)
    if (mask.bits[p]) px.push_back(p);
  return px;
}

}  // namespace

DiffMap masked_avg_color(const DiffMap& image_map, const PixelMask& mask) {
  check_mask(image_map, mask, "masked_avg_color");
  auto px = std::make_shared<const std::vector<std::size_t>>(mask_pixels(mask));
  if (px->empty()) throw ConfigError("masked_avg_color: empty mask");
  const std::size_t n = image_map.out_dim();
  auto mean = [px](std::span<const double> x) {
    Vector m(3, 0.0);
    for (std::size_t p : *px)
      for (int c = 0; c < 3; ++c) m[c] += x[p * 3 + c];
    for (double& v : m) v /= static_cast<double>(px->size());
    return m;
  };
  DiffMap stat(
      n, 3, mean,
      [mean, px, n](std::span<const double> x) {
        return Linearization{mean(x), [px, n](std::span<const double> g) {
                               Vector gx(n, 0.0);
                               const double inv = 1.0 / static_cast<double>(px->size());
                               for (std::size_t p : *px)
                                 for (int c = 0; c < 3; ++c) gx[p * 3 + c] = g[c] * inv;
                               return gx;
                             }};
      },
      "mac");
  return compose(stat, image_map).renamed("h_mac");
}

DiffMap masked_residual(const DiffMap& image_map, const PixelMask& mask) {
  check_mask(image_map, mask, "masked_residual");
  auto px = std::make_shared<const std::vector<std::size_t>>(mask_pixels(mask));
  if (px->empty()) throw ConfigError("masked_residual: empty mask");
  const std::size_t n = image_map.out_dim();
  auto residual = [px](std::span<const double> x) {
    double m[3] = {0.0, 0.0, 0.0};
    for (std::size_t p : *px)
      for (int c = 0; c < 3; ++c) m[c] += x[p * 3 + c];
    for (double& v : m) v /= static_cast<double>(px->size());
    Vector r(3 * px->size());
    for (std::size_t j = 0; j < px->size(); ++j)
      for (int c = 0; c < 3; ++c) r[3 * j + c] = x[(*px)[j] * 3 + c] - m[c];
    return r;
  };
  DiffMap stat(
      n, 3 * px->size(), residual,
      [residual, px, n](std::span<const double> x) {
        return Linearization{residual(x), [px, n](std::span<const double> g) {
                               double mean[3] = {0.0, 0.0, 0.0};
                               for (std::size_t j = 0; j < px->size(); ++j)
                                 for (int c = 0; c < 3; ++c) mean[c] += g[3 * j + c];
                               for (double& v : mean) v /= static_cast<double>(px->size());
                               Vector gx(n, 0.0);
                               for (std::size_t j = 0; j < px->size(); ++j)
                                 for (int c = 0; c < 3; ++c) gx[(*px)[j] * 3 + c] = g[3 * j + c] - mean[c];
                               return gx;
                             }};
      },
      "res");
  return compose(stat, image_map).renamed("h_res");
}

// ---------------------------------------------------------------------------
// Frequency split

namespace {

struct Tap {
  int i0, i1;
  double w1;
};

// Half-pixel bilinear up-sampling taps along one axis.
std::vector<Tap> upsample_taps(int size, int factor) {
  const int coarse = size / factor;
  std::vector<Tap> taps(size);
  for (int r = 0; r < size; ++r) {
    double s = (r + 0.5) / factor - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(coarse - 1));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, coarse - 1);
    taps[r] = {i0, i1, s - i0};
  }
  return taps;
}

void check_factor(int height, int width, int factor) {
  if (factor < 1 || height % factor != 0 || width % factor != 0)
    throw ConfigError("frequency factor " + std::to_string(factor) + " does not divide the image size");
}

}  // namespace

Vector low_pass(std::span<const double> image, int height, int width, int factor) {
  check_factor(height, width, factor);
  const int ch = height / factor, cw = width / factor;
  Vector coarse(static_cast<std::size_t>(ch) * cw * 3, 0.0);
  const double inv = 1.0 / (factor * factor);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      for (int k = 0; k < 3; ++k)
        coarse[((r / factor) * cw + c / factor) * 3 + k] += image[(static_cast<std::size_t>(r) * width + c) * 3 + k];
  for (double& v : coarse) v *= inv;
  const auto ty = upsample_taps(height, factor);
  const auto tx = upsample_taps(width, factor);
  Vector out(image.size());
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      for (int k = 0; k < 3; ++k) {
        auto at = [&](int i, int j) { return coarse[(static_cast<std::size_t>(i) * cw + j) * 3 + k]; };
        const Tap& y = ty[r];
        const Tap& x = tx[c];
        const double top = (1 - x.w1) * at(y.i0, x.i0) + x.w1 * at(y.i0, x.i1);
        const double bottom = (1 - x.w1) * at(y.i1, x.i0) + x.w1 * at(y.i1, x.i1);
        out[(static_cast<std::size_t>(r) * width + c) * 3 + k] = snap_to_grid((1 - y.w1) * top + y.w1 * bottom);
      }
  return out;
}

Vector low_pass_adjoint(std::span<const double> cotangent, int height, int width, int factor) {
  check_factor(height, width, factor);
  const int cw = width / factor;
  Vector coarse(static_cast<std::size_t>(height / factor) * cw * 3, 0.0);
  const auto ty = upsample_taps(height, factor);
  const auto tx = upsample_taps(width, factor);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      for (int k = 0; k < 3; ++k) {
        const double g = cotangent[(static_cast<std::size_t>(r) * width + c) * 3 + k];
        if (g == 0.0) continue;
        auto at = [&](int i, int j) -> double& { return coarse[(static_cast<std::size_t>(i) * cw + j) * 3 + k]; };
        const Tap& y = ty[r];
        const Tap& x = tx[c];
        at(y.i0, x.i0) += (1 - y.w1) * (1 - x.w1) * g;
        at(y.i0, x.i1) += (1 - y.w1) * x.w1 * g;
        at(y.i1, x.i0) += y.w1 * (1 - x.w1) * g;
        at(y.i1, x.i1) += y.w1 * x.w1 * g;
      }
  const double inv = 1.0 / (factor * factor);
  Vector out(cotangent.size());
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      for (int k = 0; k < 3; ++k)
        out[(static_cast<std::size_t>(r) * width + c) * 3 + k] = coarse[((r / factor) * cw + c / factor) * 3 + k] * inv;
  return out;
}

FrequencySplit frequency_split(const DiffMap& image_map, int height, int width, int factor) {
  check_factor(height, width, factor);
  const std::size_t n = static_cast<std::size_t>(height) * width * 3;
  if (image_map.out_dim() != n) throw DimensionError("frequency_split: image size mismatch");
  auto low_fn = [height, width, factor](std::span<const double> x) { return low_pass(x, height, width, factor); };
  auto low_adj = [height, width, factor](std::span<const double> g) {
    return low_pass_adjoint(g, height, width, factor);
  };
  auto high_fn = [low_fn](std::span<const double> x) {
    Vector low = low_fn(x);
    for (std::size_t i = 0; i < low.size(); ++i) low[i] = x[i] - low[i];
    return low;
  };
  auto high_adj = [low_adj](std::span<const double> g) {
    Vector gl = low_adj(g);
    for (std::size_t i = 0; i < gl.size(); ++i) gl[i] = g[i] - gl[i];
    return gl;
  };
  DiffMap low(
      n, n, low_fn, [low_fn, low_adj](std::span<const double> x) { return Linearization{low_fn(x), low_adj}; },
      "f_low");
  DiffMap high(
      n, n, high_fn, [high_fn, high_adj](std::span<const double> x) { return Linearization{high_fn(x), high_adj}; },
      "f_high");
  return {compose(low, image_map).renamed("h_low"), compose(high, image_map).renamed("h_high")};
}

// ---------------------------------------------------------------------------
// Named criteria

std::string_view to_string(CriterionKind kind) {
  static constexpr std::string_view names[] = {"mp", "fl", "ap", "id", "mac", "res", "low", "high"};
  return names[static_cast<std::size_t>(kind)];
}

std::optional<CriterionKind> parse_criterion_kind(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(CriterionKind::high); ++k)
    if (to_string(static_cast<CriterionKind>(k)) == name) return static_cast<CriterionKind>(k);
  return std::nullopt;
}

bool takes_region(CriterionKind kind) {
  return kind != CriterionKind::id && kind != CriterionKind::low && kind != CriterionKind::high;
}

std::string CriterionRef::label() const {
  std::string s(to_string(kind));
  if (takes_region(kind)) s += "[" + std::string(complement ? "~" : "") + region + "]";
  return s;
}

ReferenceFrame reference_frame(const CriterionContext& ctx, std::span<const double> u_ref) {
  ReferenceFrame ref;
  ref.image = ctx.generator->generate(ctx.space, u_ref);
  ref.parse = ctx.models->parse(ref.image);
  ref.landmarks = ctx.models->landmark_detector().evaluate(ref.image.values);
  return ref;
}

PixelMask region_mask(const ReferenceFrame& ref, const CriterionRef& crit) {
  PixelMask m = ref.parse.mask(crit.region);
  return crit.complement ? m.complement() : m;
}

DiffMap build_criterion(const CriterionRef& crit, const CriterionContext& ctx, std::span<const double> u_ref) {
  return build_criterion(crit, ctx, reference_frame(ctx, u_ref));
}

DiffMap build_criterion(const CriterionRef& crit, const CriterionContext& ctx, const ReferenceFrame& ref) {
  const ToyGenerator& gen = *ctx.generator;
  const AnalysisModels& models = *ctx.models;
  const DiffMap g = gen.image_map(ctx.space);
  if (takes_region(crit.kind) && crit.region.empty())
    throw ConfigError("criterion " + std::string(to_string(crit.kind)) + " needs a region");
  DiffMap h = [&]() -> DiffMap {
    switch (crit.kind) {
      case CriterionKind::mp:
        return masked_photometry(g, region_mask(ref, crit));
      case CriterionKind::fl: {
        LandmarkMask sel = landmark_group(crit.region);
        return landmark_criterion(g, models.landmark_detector(), crit.complement ? sel.complement() : sel);
      }
      case CriterionKind::ap: {
        const DelaunayMesh mesh = triangulate(ref.landmarks);
        const BarySampleSet all = bary_samples(mesh, ref.landmarks, ctx.sample_seed);
        const BarySampleSet kept = filter_samples(all, mesh, ref.landmarks, region_mask(ref, crit));
        if (kept.empty()) throw ConfigError("aligned photometry mask " + crit.label() + " keeps no samples");
        return aligned_photometry(g, models.landmark_detector(), mesh, kept, gen.height(), gen.width());
      }
      case CriterionKind::id:
        return identity_criterion(g, models.identity_embedder());
      case CriterionKind::mac:
        return masked_avg_color(g, region_mask(ref, crit));
      case CriterionKind::res:
        return masked_residual(g, region_mask(ref, crit));
      case CriterionKind::low:
        return frequency_split(g, gen.height(), gen.width(), ctx.frequency_factor).low;
      case CriterionKind::high:
        return frequency_split(g, gen.height(), gen.width(), ctx.frequency_factor).high;
    }
    throw ConfigError("unknown criterion");
  }();
  return h.renamed(crit.label());
}

}  // namespace latent
