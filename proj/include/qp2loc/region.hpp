#pragma once

#include <array>
#include <optional>
#include <vector>

namespace qp2loc {

using Site = std::array<long, 2>;

// Finite region: integer rectangle minus (optionally) a lattice translate of
// itself. Sites are kept in row-major order over the bounding rectangle with
// removed sites skipped, so indices are reproducible.
class ElementaryRegion {
 public:
  ElementaryRegion() = default;

  const std::vector<Site>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  long sigma() const { return sigma_; }  // max-metric diameter of the site set
  std::array<long, 2> lo() const { return lo_; }
  std::array<long, 2> hi() const { return hi_; }
  std::optional<Site> cut() const { return cut_; }

  bool contains(long n1, long n2) const { return index_of(n1, n2) >= 0; }
  int index_of(long n1, long n2) const;

  // Index pairs (i, j), i < j, of nearest-neighbor sites within the region.
  const std::vector<std::array<int, 2>>& neighbor_pairs() const { return pairs_; }

  friend ElementaryRegion make_region(std::array<long, 2> lo, std::array<long, 2> hi,
                                      std::optional<Site> cut);

 private:
  std::array<long, 2> lo_{0, 0}, hi_{0, 0};
  std::optional<Site> cut_;
  std::vector<Site> sites_;
  std::vector<std::array<int, 2>> pairs_;
  std::vector<int> lut_;
  long sigma_ = 0;
};

ElementaryRegion make_region(std::array<long, 2> lo, std::array<long, 2> hi,
                             std::optional<Site> cut = {});
// center + [-radius, radius]^2
ElementaryRegion box_region(Site center, long radius);

// Max-metric distance between sites.
inline long dist_inf(const Site& a, const Site& b) {
  return std::max(std::labs(a[0] - b[0]), std::labs(a[1] - b[1]));
}
// Graph (l1) distance.
inline long dist_l1(const Site& a, const Site& b) {
  return std::labs(a[0] - b[0]) + std::labs(a[1] - b[1]);
}

// Sites of W adjacent to Lambda \ W (internal boundary of W relative to
// Lambda). W must be a subset of Lambda's sites.
std::vector<Site> internal_boundary(const std::vector<Site>& w, const ElementaryRegion& lambda);

// True when the site set equals a rectangle minus a translate of itself
// (equivalently: its bounding-box complement is empty or a corner-anchored
// rectangle).
bool is_elementary_site_set(const std::vector<Site>& sites);

struct Partition {
  struct Piece {
    std::vector<Site> sites;
    bool elementary = true;
  };
  std::vector<Piece> pieces;
  int non_elementary = 0;
};

// Cover of the region by translates Q = [-M0, M0]^2 + 2*M0*Z^2; pieces are the
// nonempty intersections Q cap Lambda.
Partition partition(const ElementaryRegion& lambda, long m0);

}  // namespace qp2loc
