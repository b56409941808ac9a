#include "qp2loc/region.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qp2loc {

int ElementaryRegion::index_of(long n1, long n2) const {
  if (n1 < lo_[0] || n1 > hi_[0] || n2 < lo_[1] || n2 > hi_[1]) return -1;
  const long w2 = hi_[1] - lo_[1] + 1;
  return lut_[static_cast<std::size_t>((n1 - lo_[0]) * w2 + (n2 - lo_[1]))];
}

ElementaryRegion make_region(std::array<long, 2> lo, std::array<long, 2> hi,
                             std::optional<Site> cut) {
  if (lo[0] > hi[0] || lo[1] > hi[1]) throw std::invalid_argument("make_region: empty rectangle");
  if (cut && (*cut)[0] == 0 && (*cut)[1] == 0)
    throw std::invalid_argument("make_region: cut vector must be nonzero");

  ElementaryRegion r;
  r.lo_ = lo;
  r.hi_ = hi;
  r.cut_ = cut;
  const long w1 = hi[0] - lo[0] + 1, w2 = hi[1] - lo[1] + 1;
  r.lut_.assign(static_cast<std::size_t>(w1 * w2), -1);

  auto removed = [&](long n1, long n2) {
    if (!cut) return false;
    // site belongs to rect + cut  <=>  site - cut is inside rect
    const long m1 = n1 - (*cut)[0], m2 = n2 - (*cut)[1];
    return m1 >= lo[0] && m1 <= hi[0] && m2 >= lo[1] && m2 <= hi[1];
  };

  long min1 = hi[0] + 1, max1 = lo[0] - 1, min2 = hi[1] + 1, max2 = lo[1] - 1;
  for (long n1 = lo[0]; n1 <= hi[0]; ++n1)
    for (long n2 = lo[1]; n2 <= hi[1]; ++n2) {
      if (removed(n1, n2)) continue;
      r.lut_[static_cast<std::size_t>((n1 - lo[0]) * w2 + (n2 - lo[1]))] =
          static_cast<int>(r.sites_.size());
      r.sites_.push_back({n1, n2});
      min1 = std::min(min1, n1);
      max1 = std::max(max1, n1);
      min2 = std::min(min2, n2);
      max2 = std::max(max2, n2);
    }
  if (r.sites_.empty()) throw std::invalid_argument("make_region: cut removes every site");
  r.sigma_ = std::max(max1 - min1, max2 - min2);

  for (int i = 0; i < static_cast<int>(r.sites_.size()); ++i) {
    const Site& s = r.sites_[static_cast<std::size_t>(i)];
    for (const Site d : {Site{1, 0}, Site{0, 1}}) {
      const int j = r.index_of(s[0] + d[0], s[1] + d[1]);
      if (j >= 0) r.pairs_.push_back({i, j});
    }
  }
  return r;
}

ElementaryRegion box_region(Site center, long radius) {
  return make_region({center[0] - radius, center[1] - radius},
                     {center[0] + radius, center[1] + radius});
}

std::vector<Site> internal_boundary(const std::vector<Site>& w, const ElementaryRegion& lambda) {
  std::set<Site> in_w(w.begin(), w.end());
  for (const Site& s : w)
    if (!lambda.contains(s[0], s[1]))
      throw std::invalid_argument("internal_boundary: W is not a subset of Lambda");
  std::vector<Site> boundary;
  for (const Site& s : w) {
    for (const Site d : {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}}) {
      const long n1 = s[0] + d[0], n2 = s[1] + d[1];
      if (lambda.contains(n1, n2) && in_w.find({n1, n2}) == in_w.end()) {
        boundary.push_back(s);
        break;
      }
    }
  }
  return boundary;
}

bool is_elementary_site_set(const std::vector<Site>& sites) {
  if (sites.empty()) return false;
  long lo1 = sites[0][0], hi1 = sites[0][0], lo2 = sites[0][1], hi2 = sites[0][1];
  std::set<Site> set(sites.begin(), sites.end());
  for (const Site& s : sites) {
    lo1 = std::min(lo1, s[0]);
    hi1 = std::max(hi1, s[0]);
    lo2 = std::min(lo2, s[1]);
    hi2 = std::max(hi2, s[1]);
  }
  std::vector<Site> missing;
  for (long a = lo1; a <= hi1; ++a)
    for (long b = lo2; b <= hi2; ++b)
      if (set.find({a, b}) == set.end()) missing.push_back({a, b});
  if (missing.empty()) return true;  // plain rectangle

  // The removed part must itself be a full rectangle touching a corner of the
  // bounding box (that is what intersecting with a translate looks like).
  long mlo1 = missing[0][0], mhi1 = missing[0][0], mlo2 = missing[0][1], mhi2 = missing[0][1];
  for (const Site& s : missing) {
    mlo1 = std::min(mlo1, s[0]);
    mhi1 = std::max(mhi1, s[0]);
    mlo2 = std::min(mlo2, s[1]);
    mhi2 = std::max(mhi2, s[1]);
  }
  const long area = (mhi1 - mlo1 + 1) * (mhi2 - mlo2 + 1);
  if (area != static_cast<long>(missing.size())) return false;
  const bool touches1 = (mlo1 == lo1) || (mhi1 == hi1);
  const bool touches2 = (mlo2 == lo2) || (mhi2 == hi2);
  return touches1 && touches2;
}

Partition partition(const ElementaryRegion& lambda, long m0) {
  if (m0 < 1) throw std::invalid_argument("partition: M0 must be >= 1");
  Partition part;
  const long lo1 = lambda.lo()[0], hi1 = lambda.hi()[0];
  const long lo2 = lambda.lo()[1], hi2 = lambda.hi()[1];
  const long a_lo = static_cast<long>(std::floor(static_cast<double>(lo1 - m0) / (2.0 * m0)));
  const long a_hi = static_cast<long>(std::ceil(static_cast<double>(hi1 + m0) / (2.0 * m0)));
  const long b_lo = static_cast<long>(std::floor(static_cast<double>(lo2 - m0) / (2.0 * m0)));
  const long b_hi = static_cast<long>(std::ceil(static_cast<double>(hi2 + m0) / (2.0 * m0)));
  for (long a = a_lo; a <= a_hi; ++a)
    for (long b = b_lo; b <= b_hi; ++b) {
      const long c1 = 2 * m0 * a, c2 = 2 * m0 * b;
      Partition::Piece piece;
      for (long n1 = std::max(lo1, c1 - m0); n1 <= std::min(hi1, c1 + m0); ++n1)
        for (long n2 = std::max(lo2, c2 - m0); n2 <= std::min(hi2, c2 + m0); ++n2)
          if (lambda.contains(n1, n2)) piece.sites.push_back({n1, n2});
      if (piece.sites.empty()) continue;
      piece.elementary = is_elementary_site_set(piece.sites);
      if (!piece.elementary) ++part.non_elementary;
      part.pieces.push_back(std::move(piece));
    }
  return part;
}

}  // namespace qp2loc
