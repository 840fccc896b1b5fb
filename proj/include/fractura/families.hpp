#pragma once

// Hausdorff-convergent crack families and the numerical lower-semicontinuity
// experiment: tabulate (d_H(K_n, K), F(K_n)) and compare F(K) against the
// tail infimum of the sequence.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fractura/anisotropy.hpp"
#include "fractura/geometry.hpp"

namespace fractura {

struct ConvergentFamily {
  std::string name;
  std::function<CrackSet(int)> member;  // n >= 1
  CrackSet limit;
  DomainBox domain = DomainBox::box(0.0, 0.0, 1.0, 1.0);
};

// Axis-aligned staircase from (0,0) to (1,1) with n steps; total length 2 for
// every n, Hausdorff-converging to the unit diagonal (length sqrt(2)).
inline CrackSet staircase_crack(int n) {
  std::vector<Segment> segs;
  const double h = 1.0 / n;
  for (int k = 0; k < n; ++k) {
    const double x = k * h, y = k * h;
    segs.push_back({{x, y}, {x + h, y}});
    segs.push_back({{x + h, y}, {x + h, y + h}});
  }
  return CrackSet::from_segments(std::move(segs));
}

inline ConvergentFamily staircase_family() {
  ConvergentFamily fam;
  fam.name = "staircase_to_diagonal";
  fam.member = [](int n) { return staircase_crack(n); };
  fam.limit = CrackSet::from_segments({{{0.0, 0.0}, {1.0, 1.0}}});
  return fam;
}

// Unit segment from the origin rotating onto the horizontal axis.
inline ConvergentFamily rotating_segment_family() {
  ConvergentFamily fam;
  fam.name = "rotating_segment";
  fam.member = [](int n) {
    const double theta = 0.25 * 3.14159265358979323846 / n;
    return CrackSet::from_segments({{{0.0, 0.0}, {std::cos(theta), std::sin(theta)}}});
  };
  fam.limit = CrackSet::from_segments({{{0.0, 0.0}, {1.0, 0.0}}});
  return fam;
}

inline ConvergentFamily constant_family(CrackSet K, DomainBox domain) {
  ConvergentFamily fam;
  fam.name = "constant";
  fam.member = [K](int) { return K; };
  fam.limit = std::move(K);
  fam.domain = std::move(domain);
  return fam;
}

inline std::vector<ConvergentFamily> builtin_families() {
  std::vector<ConvergentFamily> fams;
  fams.push_back(staircase_family());
  fams.push_back(rotating_segment_family());
  fams.push_back(constant_family(CrackSet::from_segments({{{0.25, 0.25}, {0.75, 0.5}}}),
                                 DomainBox::box(0.0, 0.0, 1.0, 1.0)));
  return fams;
}

inline ConvergentFamily builtin_family(const std::string& name) {
  for (auto& fam : builtin_families())
    if (fam.name == name) return fam;
  throw ValidationError("unknown convergent family \"" + name + "\"");
}

struct LscRow {
  int n;
  double d_hausdorff;
  double energy;
};

struct LscReport {
  std::string family;
  std::vector<LscRow> rows;
  double tail_infimum = 0.0;   // inf of F(K_n) over the tail n > n_max/2
  double limit_energy = 0.0;   // F(K)
  double gap = 0.0;            // tail_infimum - limit_energy
  bool semicontinuity_holds = false;
};

inline LscReport lsc_experiment(const ConvergentFamily& family, const AnisotropyField& phi,
                                int n_max) {
  if (n_max < 1) throw ValidationError("lsc_experiment needs n_max >= 1");
  LscReport report;
  report.family = family.name;
  double prev_dist = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_max; ++n) {
    const CrackSet k = family.member(n);
    const double d = hausdorff_distance(k, family.limit, family.domain);
    if (d > prev_dist + 2 * kHausdorffTol)
      throw ValidationError("family \"" + family.name +
                            "\" is not Hausdorff-nonincreasing at n = " + std::to_string(n));
    prev_dist = d;
    report.rows.push_back({n, d, surface_energy(k, phi)});
  }
  report.tail_infimum = std::numeric_limits<double>::infinity();
  for (const auto& row : report.rows)
    if (row.n > n_max / 2) report.tail_infimum = std::min(report.tail_infimum, row.energy);
  report.limit_energy = surface_energy(family.limit, phi);
  report.gap = report.tail_infimum - report.limit_energy;
  report.semicontinuity_holds = report.limit_energy <= report.tail_infimum + 1e-9;
  return report;
}

}  // namespace fractura
