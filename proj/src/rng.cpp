#include "sface/rng.hpp"

#include <cmath>

namespace sface {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t RngStream::mix(std::uint64_t seed, std::uint64_t id) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (id + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : eng_(mix(master_seed, stream_id)) {}

double RngStream::uniform() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_pos() {
  return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
}

void RngStream::normal_pair(double& z0, double& z1) {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  z0 = r * std::cos(2.0 * kPi * u2);
  z1 = r * std::sin(2.0 * kPi * u2);
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double z0, z1;
  normal_pair(z0, z1);
  spare_ = z1;
  has_spare_ = true;
  return z0;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  // multiply-shift; bias is O(n / 2^64), immaterial at the sizes used here
  const unsigned __int128 prod =
      static_cast<unsigned __int128>(eng_()) * static_cast<unsigned __int128>(n);
  return static_cast<std::uint64_t>(prod >> 64);
}

}  // namespace sface
