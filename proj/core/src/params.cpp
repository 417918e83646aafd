#include "tpadv/params.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "tpadv/numeric.hpp"

namespace tpadv {

Params::Params(int n, int m, std::uint64_t q) : n_(n), m_(m), q_(q) {
  if (n < 1 || n > kMaxBits) {
    throw Error("Params: n must be in [1, " + std::to_string(kMaxBits) + "], got " +
                std::to_string(n));
  }
  if (m < 0 || m >= n) {
    throw Error("Params: m must satisfy 0 <= m < n, got m=" + std::to_string(m));
  }
  if (q < 1 || q > domain()) {
    throw Error("Params: q must satisfy 1 <= q <= 2^n, got q=" + std::to_string(q));
  }
}

std::string Params::to_string() const {
  return "(n=" + std::to_string(n_) + ", m=" + std::to_string(m_) + ", q=" + std::to_string(q_) +
         ")";
}

void Transcript::validate(const Params& p) const {
  if (replies.size() != p.q()) {
    throw Error("Transcript: length " + std::to_string(replies.size()) + " != q=" +
                std::to_string(p.q()));
  }
  const auto b = p.buckets();
  for (auto r : replies) {
    if (r >= b) throw Error("Transcript: reply " + std::to_string(r) + " out of range");
  }
}

CountProfile::CountProfile(std::vector<std::uint64_t> parts) : parts_(std::move(parts)) {
  std::erase(parts_, 0);
  std::sort(parts_.begin(), parts_.end(), std::greater<>());
}

std::uint64_t CountProfile::total() const {
  return std::accumulate(parts_.begin(), parts_.end(), std::uint64_t{0});
}

std::uint64_t CountProfile::colliding_pairs() const {
  std::uint64_t s = 0;
  for (auto d : parts_) s += d * (d - 1) / 2;
  return s;
}

std::string CountProfile::to_string() const {
  std::string s = "{";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(parts_[i]);
  }
  return s + "}";
}

}  // namespace tpadv
