#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "magnifier/errors.hpp"

// The quotient graph M has vertices {R,S,T} and three edges RS, ST, ST,
// giving six symmetric arcs. Its maximal abelian cover G = Z x M is an
// infinite spine of S-T edges with one pendant R per cell. Cell bookkeeping
// follows the walk's evolution rules: the arc e- of cell j runs (j,S)->(j-1,T)
// and its reverse, labelled (j,eb-), runs (j,T)->(j+1,S). All other arcs stay
// inside their cell.

namespace magnifier {

enum class Vertex : int { R = 0, S = 1, T = 2 };

enum class Arc : int {
  E0 = 0,       // S -> R
  EPlus = 1,    // S -> T, same cell
  EMinus = 2,   // S -> T, cell shift -1
  E0Bar = 3,    // R -> S
  EPlusBar = 4, // T -> S, same cell
  EMinusBar = 5 // T -> S, cell shift +1
};

inline constexpr int kArcCount = 6;

inline constexpr std::array<Arc, kArcCount> all_arcs() {
  return {Arc::E0, Arc::EPlus, Arc::EMinus, Arc::E0Bar, Arc::EPlusBar, Arc::EMinusBar};
}

constexpr int arc_index(Arc a) { return static_cast<int>(a); }

constexpr Arc arc_from_index(int i) { return static_cast<Arc>(i); }

/// Label-level reversal, the involution e0<->eb0, e+<->eb+, e-<->eb-.
constexpr Arc reverse(Arc a) {
  return arc_from_index((arc_index(a) + 3) % 6);
}

constexpr Vertex origin(Arc a) {
  switch (a) {
    case Arc::E0:
    case Arc::EPlus:
    case Arc::EMinus: return Vertex::S;
    case Arc::E0Bar: return Vertex::R;
    default: return Vertex::T;
  }
}

constexpr Vertex terminal(Arc a) { return origin(reverse(a)); }

inline const char* name(Arc a) {
  static constexpr const char* kNames[] = {"e0", "e+", "e-", "eb0", "eb+", "eb-"};
  return kNames[arc_index(a)];
}

inline const char* name(Vertex v) {
  static constexpr const char* kNames[] = {"R", "S", "T"};
  return kNames[static_cast<int>(v)];
}

/// An arc of the cover G: cell index plus quotient arc label.
struct SitePosition {
  std::int64_t cell = 0;
  Arc arc = Arc::E0;

  friend bool operator==(const SitePosition&, const SitePosition&) = default;
};

struct LiftedVertex {
  std::int64_t cell = 0;
  Vertex vertex = Vertex::R;

  friend bool operator==(const LiftedVertex&, const LiftedVertex&) = default;
};

/// Cell shift from origin cell to terminal cell carried by an arc.
constexpr std::int64_t cell_shift(Arc a) {
  if (a == Arc::EMinus) return -1;
  if (a == Arc::EMinusBar) return +1;
  return 0;
}

struct LiftedEndpoints {
  LiftedVertex origin;
  LiftedVertex terminal;
};

/// Endpoints of (j, a) in G. (j,e-): (j,S)->(j-1,T); (j,eb-): (j,T)->(j+1,S);
/// every other arc stays in cell j.
constexpr LiftedEndpoints lifted_endpoints(SitePosition pos) {
  return {LiftedVertex{pos.cell, origin(pos.arc)},
          LiftedVertex{pos.cell + cell_shift(pos.arc), terminal(pos.arc)}};
}

/// Arc-level reversal on G: swaps the lifted endpoints. The e-/eb- pair
/// carries the cell shift, so reverse((j,e-)) = (j-1,eb-) and
/// reverse((j,eb-)) = (j+1,e-).
constexpr SitePosition reverse(SitePosition pos) {
  return {pos.cell + cell_shift(pos.arc), reverse(pos.arc)};
}

/// A finite contiguous block of cells [jmin, jmax].
struct Window {
  std::int64_t jmin = 0;
  std::int64_t jmax = 0;

  constexpr Window() = default;
  constexpr Window(std::int64_t lo, std::int64_t hi) : jmin(lo), jmax(hi) {
    if (hi < lo) throw std::invalid_argument("Window: jmax < jmin");
  }

  constexpr std::int64_t cell_count() const { return jmax - jmin + 1; }
  constexpr std::int64_t dimension() const { return kArcCount * cell_count(); }
  constexpr bool contains(std::int64_t j) const { return jmin <= j && j <= jmax; }

  friend bool operator==(const Window&, const Window&) = default;
};

/// Cell-major flat index over a window, arc order (e0,e+,e-,eb0,eb+,eb-).
inline std::int64_t flat_index(SitePosition pos, const Window& w) {
  if (!w.contains(pos.cell)) {
    throw WindowOverflowError("flat_index: cell " + std::to_string(pos.cell) +
                              " outside window [" + std::to_string(w.jmin) + "," +
                              std::to_string(w.jmax) + "]");
  }
  return (pos.cell - w.jmin) * kArcCount + arc_index(pos.arc);
}

/// Inverse of flat_index.
inline SitePosition site_at(std::int64_t index, const Window& w) {
  if (index < 0 || index >= w.dimension()) {
    throw WindowOverflowError("site_at: index out of range");
  }
  return {w.jmin + index / kArcCount, arc_from_index(static_cast<int>(index % kArcCount))};
}

} // namespace magnifier
