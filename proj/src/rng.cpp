#include "latent/rng.hpp"

#include <cmath>
#include <numbers>

namespace latent {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a
std::uint64_t hash_name(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::string_view stream) : key_(mix64(mix64(seed) ^ hash_name(stream))) {}

CounterRng CounterRng::split(std::string_view name) const { return CounterRng(mix64(key_ ^ hash_name(name))); }

std::uint64_t CounterRng::next_u64() { return mix64(key_ + 0x632be59bd9b4e019ULL * (++counter_)); }

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  // Box–Muller, one draw per call so the stream position stays simple.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vector CounterRng::normal_vector(std::size_t n, double scale) {
  Vector v(n);
  for (double& x : v) x = scale * normal();
  return v;
}

}  // namespace latent
