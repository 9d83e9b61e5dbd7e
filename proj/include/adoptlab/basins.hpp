#pragma once

// Basin-of-attraction maps over a barycentric grid at frozen cost. Each
// node integrates independently, so the map is filled by a small worker
// pool writing disjoint slots; results do not depend on the worker count.

#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "adoptlab/dynamics.hpp"
#include "adoptlab/equilibria.hpp"
#include "adoptlab/model.hpp"

namespace adoptlab {

enum class BasinLabel { G, P, Unclassified };

inline const char* to_string(BasinLabel l) {
  switch (l) {
    case BasinLabel::G: return "G";
    case BasinLabel::P: return "P";
    default: return "Unclassified";
  }
}

struct BasinCell {
  double xG;
  double xP;
  BasinLabel label;
  double timeToConverge; // tMax when unresolved
};

struct BasinMap {
  int resolution = 0;
  std::vector<BasinCell> cells;
  std::vector<std::array<double, 2>> separatrix; // (xG, xP) midpoints
  std::optional<double> edgeCrossingXG; // refined G-P edge intersection
  double measureG = 0.0;
  double measureP = 0.0;
  double measureUnclassified = 0.0;
};

namespace detail {

inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  size_t workers = std::min<size_t>(hw == 0 ? 1 : hw, n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

} // namespace detail

/// Label of the attractor reached from `from` under the frozen-cost flow.
inline BasinLabel basin_label(const SimplexState& from, const ModelParams& p,
                              double c, const IntegrationConfig& cfg,
                              double* timeOut = nullptr) {
  IntegrationConfig quiet = cfg;
  quiet.recordSamples = false;
  IntegrateOptions opt;
  opt.freezeCost = true;
  FullState init = initial_state(from, p);
  init.c = c;
  Trajectory tr = integrate(init, p, quiet, opt);
  if (timeOut) *timeOut = tr.finalState.t;
  switch (tr.convergedCorner) {
    case Corner::G: return BasinLabel::G;
    case Corner::P: return BasinLabel::P;
    default: return BasinLabel::Unclassified;
  }
}

/// Grid map of the two basins at frozen cost c. Nodes are xG = i/R,
/// xP = j/R with i + j <= R; boundary nodes are included (the faces are
/// invariant, and the xP = 0 face settles on the rejection corner, which is
/// reported as Unclassified rather than silently assigned). The separatrix
/// is the set of midpoints between adjacent nodes with different labels,
/// plus a bisection-refined crossing of the G-P edge.
inline BasinMap map_basins(const ModelParams& p, double c, int resolution,
                           const IntegrationConfig& cfg) {
  if (resolution < 2) throw ValidationError("resolution must be >= 2");
  BasinMap map;
  map.resolution = resolution;

  const int R = resolution;
  std::vector<std::pair<int, int>> nodes;
  nodes.reserve(static_cast<size_t>(R + 1) * (R + 2) / 2);
  for (int i = 0; i <= R; ++i)
    for (int j = 0; j + i <= R; ++j) nodes.emplace_back(i, j);

  map.cells.resize(nodes.size());
  detail::parallel_for(nodes.size(), [&](size_t idx) {
    auto [i, j] = nodes[idx];
    double xG = static_cast<double>(i) / R;
    double xP = static_cast<double>(j) / R;
    SimplexState s{xG, xP, 1.0 - xG - xP};
    double tConv = 0.0;
    BasinLabel label = basin_label(s, p, c, cfg, &tConv);
    map.cells[idx] = {xG, xP, label, tConv};
  });

  // measures: equal node weights
  size_t nG = 0, nP = 0, nU = 0;
  for (const auto& cell : map.cells) {
    if (cell.label == BasinLabel::G) ++nG;
    else if (cell.label == BasinLabel::P) ++nP;
    else ++nU;
  }
  double total = static_cast<double>(map.cells.size());
  map.measureG = nG / total;
  map.measureP = nP / total;
  map.measureUnclassified = nU / total;

  // separatrix midpoints between differently-labelled neighbours
  auto index_of = [&](int i, int j) {
    // nodes are emitted i-major with rows of length R - i + 1
    // offset(i) = sum_{a<i} (R - a + 1)
    long off = static_cast<long>(i) * (R + 1) - static_cast<long>(i) * (i - 1) / 2;
    return static_cast<size_t>(off + j);
  };
  auto label_at = [&](int i, int j) { return map.cells[index_of(i, j)].label; };
  auto push_mid = [&](int i1, int j1, int i2, int j2) {
    BasinLabel a = label_at(i1, j1), b = label_at(i2, j2);
    bool gp = (a == BasinLabel::G && b == BasinLabel::P) ||
              (a == BasinLabel::P && b == BasinLabel::G);
    if (!gp) return;
    map.separatrix.push_back({0.5 * (i1 + i2) / R, 0.5 * (j1 + j2) / R});
  };
  for (int i = 0; i <= R; ++i)
    for (int j = 0; j + i <= R; ++j) {
      if (i + 1 + j <= R) push_mid(i, j, i + 1, j);
      if (i + j + 1 <= R) push_mid(i, j, i, j + 1);
      if (i + 1 <= R && j - 1 >= 0) push_mid(i, j, i + 1, j - 1);
    }
  std::sort(map.separatrix.begin(), map.separatrix.end(),
            [](const auto& a, const auto& b) {
              double ra = 1.0 - a[0] - a[1], rb = 1.0 - b[0] - b[1];
              if (ra != rb) return ra < rb;
              return a[0] < b[0];
            });
  map.separatrix.erase(std::unique(map.separatrix.begin(),
                                   map.separatrix.end()),
                       map.separatrix.end());

  // refine the G-P edge crossing by bisection over xG with xR = 0
  std::optional<std::pair<double, double>> bracket;
  for (int i = 0; i < R; ++i) {
    BasinLabel a = label_at(i, R - i), b = label_at(i + 1, R - i - 1);
    if (a == BasinLabel::P && b == BasinLabel::G) {
      bracket = {static_cast<double>(i) / R, static_cast<double>(i + 1) / R};
      break;
    }
  }
  if (bracket) {
    auto [lo, hi] = *bracket;
    while (hi - lo > 1e-4) {
      double mid = 0.5 * (lo + hi);
      BasinLabel l = basin_label({mid, 1.0 - mid, 0.0}, p, c, cfg);
      if (l == BasinLabel::G)
        hi = mid;
      else
        lo = mid;
    }
    map.edgeCrossingXG = 0.5 * (lo + hi);
    map.separatrix.insert(map.separatrix.begin(),
                          {*map.edgeCrossingXG, 1.0 - *map.edgeCrossingXG});
  }

  return map;
}

enum class SweepVariable { PsiDev, PsiG, PsiP, Alpha, B };

inline const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::PsiDev: return "psiDev";
    case SweepVariable::PsiG: return "psiG";
    case SweepVariable::PsiP: return "psiP";
    case SweepVariable::Alpha: return "alpha";
    default: return "B";
  }
}

struct BasinSweepRow {
  double value;
  BasinMap map;
  double meanTimeToG; // over cells labelled G in every map of the sweep
  double meanTimeToP; // same, P side
};

struct BasinSweepResult {
  SweepVariable variable;
  std::vector<BasinSweepRow> rows;
  bool measureGMonotoneNonIncreasing; // judged only for the psiDev sweep
};

/// One basin map per sweep value, with convergence-time statistics taken
/// over the cells that keep their label across the whole sweep (otherwise
/// marginal cells near a moving separatrix dominate the means).
inline BasinSweepResult basin_measure_sweep(const ModelParams& base,
                                            SweepVariable variable,
                                            const std::vector<double>& values,
                                            int resolution,
                                            const IntegrationConfig& cfg) {
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  BasinSweepResult out;
  out.variable = variable;

  for (double v : values) {
    ModelParams p = base;
    switch (variable) {
      case SweepVariable::PsiDev: p.psiDev = v; break;
      case SweepVariable::PsiG: p.psiG = v; break;
      case SweepVariable::PsiP: p.psiP = v; break;
      case SweepVariable::Alpha: p.alpha = v; break;
      case SweepVariable::B: p.B = v; break;
    }
    BasinSweepRow row;
    row.value = v;
    row.map = map_basins(p, p.c0, resolution, cfg);
    row.meanTimeToG = 0.0;
    row.meanTimeToP = 0.0;
    out.rows.push_back(std::move(row));
  }

  // stable-cell means
  size_t nCells = out.rows.front().map.cells.size();
  std::vector<bool> alwaysG(nCells, true), alwaysP(nCells, true);
  for (const auto& row : out.rows)
    for (size_t i = 0; i < nCells; ++i) {
      if (row.map.cells[i].label != BasinLabel::G) alwaysG[i] = false;
      if (row.map.cells[i].label != BasinLabel::P) alwaysP[i] = false;
    }
  for (auto& row : out.rows) {
    double sg = 0.0, sp = 0.0;
    size_t cg = 0, cp = 0;
    for (size_t i = 0; i < nCells; ++i) {
      if (alwaysG[i]) {
        sg += row.map.cells[i].timeToConverge;
        ++cg;
      }
      if (alwaysP[i]) {
        sp += row.map.cells[i].timeToConverge;
        ++cp;
      }
    }
    row.meanTimeToG = cg ? sg / cg : 0.0;
    row.meanTimeToP = cp ? sp / cp : 0.0;
  }

  out.measureGMonotoneNonIncreasing = true;
  if (variable == SweepVariable::PsiDev) {
    for (size_t i = 1; i < out.rows.size(); ++i)
      if (out.rows[i].map.measureG > out.rows[i - 1].map.measureG + 1e-12)
        out.measureGMonotoneNonIncreasing = false;
  }
  return out;
}

} // namespace adoptlab
