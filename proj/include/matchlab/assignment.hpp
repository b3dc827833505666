#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace matchlab {

// Dense linear assignment by the Jonker-Volgenant algorithm: column
// reduction, reduction transfer, augmenting row reduction, then shortest
// augmenting paths for the remaining free rows. Exact optimum.
//
// `cost` is any callable (i, j) -> double; rowsol[i] receives the column
// assigned to row i. Returns the total assignment cost.
template <class CostFn>
double lapjv(int n, const CostFn& cost, std::vector<int>& rowsol) {
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<int> colsol(n, -1), matches(n, 0), free_rows(n), collist(n), pred(n);
  std::vector<double> v(n, 0.0), d(n);
  rowsol.assign(n, -1);

  // column reduction
  for (int j = n - 1; j >= 0; --j) {
    double cmin = cost(0, j);
    int imin = 0;
    for (int i = 1; i < n; ++i) {
      double c = cost(i, j);
      if (c < cmin) {
        cmin = c;
        imin = i;
      }
    }
    v[j] = cmin;
    if (++matches[imin] == 1) {
      rowsol[imin] = j;
      colsol[j] = imin;
    }
  }

  // reduction transfer
  int numfree = 0;
  for (int i = 0; i < n; ++i) {
    if (matches[i] == 0) {
      free_rows[numfree++] = i;
    } else if (matches[i] == 1) {
      int j1 = rowsol[i];
      double m = kInf;
      for (int j = 0; j < n; ++j)
        if (j != j1) m = std::min(m, cost(i, j) - v[j]);
      v[j1] -= m;
    }
  }

  // augmenting row reduction, two sweeps
  for (int sweep = 0; sweep < 2; ++sweep) {
    int k = 0;
    int prvnumfree = numfree;
    numfree = 0;
    while (k < prvnumfree) {
      int i = free_rows[k++];
      double umin = cost(i, 0) - v[0];
      int j1 = 0;
      double usubmin = kInf;
      int j2 = -1;
      for (int j = 1; j < n; ++j) {
        double h = cost(i, j) - v[j];
        if (h < usubmin) {
          if (h >= umin) {
            usubmin = h;
            j2 = j;
          } else {
            usubmin = umin;
            j2 = j1;
            umin = h;
            j1 = j;
          }
        }
      }
      int i0 = colsol[j1];
      if (umin < usubmin) {
        v[j1] -= usubmin - umin;
      } else if (i0 >= 0) {
        j1 = j2;
        i0 = colsol[j1];
      }
      rowsol[i] = j1;
      colsol[j1] = i;
      // displaced rows always wait for the next sweep: immediate
      // reconsideration can cycle forever on matrices with exact ties
      // (e.g. replicated identical rows), and the shortest augmenting
      // path phase below resolves whatever the heuristic leaves free
      if (i0 >= 0) free_rows[numfree++] = i0;
    }
  }

  // shortest augmenting path for each remaining free row
  for (int f = 0; f < numfree; ++f) {
    int freerow = free_rows[f];
    for (int j = 0; j < n; ++j) {
      d[j] = cost(freerow, j) - v[j];
      pred[j] = freerow;
      collist[j] = j;
    }
    int low = 0, up = 0, last = -1, endofpath = -1;
    double dmin = 0.0;
    bool found = false;
    while (!found) {
      if (up == low) {
        last = low - 1;
        dmin = d[collist[up++]];
        for (int k = up; k < n; ++k) {
          int j = collist[k];
          double h = d[j];
          if (h <= dmin) {
            if (h < dmin) {
              up = low;
              dmin = h;
            }
            collist[k] = collist[up];
            collist[up++] = j;
          }
        }
        for (int k = low; k < up; ++k) {
          int j = collist[k];
          if (colsol[j] < 0) {
            endofpath = j;
            found = true;
            break;
          }
        }
      }
      if (!found) {
        int j1 = collist[low++];
        int i = colsol[j1];
        double h = cost(i, j1) - v[j1] - dmin;
        for (int k = up; k < n; ++k) {
          int j = collist[k];
          double dnew = cost(i, j) - v[j] - h;
          if (dnew < d[j]) {
            pred[j] = i;
            if (dnew == dmin) {
              if (colsol[j] < 0) {
                endofpath = j;
                found = true;
                break;
              }
              collist[k] = collist[up];
              collist[up++] = j;
            }
            d[j] = dnew;
          }
        }
      }
    }
    for (int k = 0; k <= last; ++k) {
      int j = collist[k];
      v[j] += d[j] - dmin;
    }
    int i;
    do {
      i = pred[endofpath];
      colsol[endofpath] = i;
      int j1 = rowsol[i];
      rowsol[i] = endofpath;
      endofpath = j1;
    } while (i != freerow);
  }

  double total = 0.0;
  for (int i = 0; i < n; ++i) total += cost(i, rowsol[i]);
  return total;
}

// Rewrites rowsol to the lexicographically smallest permutation reachable
// from it by cost-preserving pairwise swaps. Keeps golden outputs stable
// when the optimum is degenerate.
template <class CostFn>
void canonicalize_assignment(int n, const CostFn& cost, std::vector<int>& rowsol) {
  int passes = n <= 256 ? n : 2;
  for (int p = 0; p < passes; ++p) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rowsol[i] <= rowsol[j]) continue;
        double keep = cost(i, rowsol[i]) + cost(j, rowsol[j]);
        double swap = cost(i, rowsol[j]) + cost(j, rowsol[i]);
        if (keep == swap) {
          std::swap(rowsol[i], rowsol[j]);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
}

}  // namespace matchlab
