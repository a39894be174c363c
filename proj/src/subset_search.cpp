#include "aggreg/subset_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

namespace aggreg::kernels {

namespace {

constexpr std::size_t kParallelMinColumns = 16;

// Cholesky factor of Psi restricted to the basis columns of the current
// support, grown one column at a time. For every candidate column j it keeps
// the forward-substitution row s(j) against the basis prefix together with
// the running sums |s(j)|^2 and <s(j), w>, so testing a candidate costs O(1)
// and appending one costs O(k) per remaining candidate. Dependent columns
// join the support but not the basis.
class CholeskyPath {
 public:
  CholeskyPath(const std::vector<double>& psi, std::span<const double> c, std::size_t m)
      : psi_(psi), c_(c), m_(m), srow_(m * m, 0.0), sq_((m + 1) * m, 0.0), lw_((m + 1) * m, 0.0),
        w_(m, 0.0), explained_(m + 1, 0.0) {}

  // Energy explained by the current basis.
  double explained() const { return explained_[level_]; }

  // Gain from appending column j, without changing state. Valid for every
  // column whose row was refreshed by the pushes so far.
  double trial_gain(std::size_t j) const {
    double d2 = 0.0;
    double wk = 0.0;
    if (!pivot(j, d2, wk)) return 0.0;
    return wk * wk;
  }

  // Appends column j and refreshes the rows of candidates [from, m).
  // Returns false (and leaves the basis unchanged) when j is dependent.
  bool push(std::size_t j, std::size_t from) {
    double d2 = 0.0;
    double wk = 0.0;
    if (!pivot(j, d2, wk)) return false;
    const std::size_t k = level_;
    const double lkk = std::sqrt(d2);
    w_[k] = wk;
    explained_[k + 1] = explained_[k] + wk * wk;
    const double* sj = srow_.data() + j * m_;
    const double* sq_in = sq_.data() + k * m_;
    const double* lw_in = lw_.data() + k * m_;
    double* sq_out = sq_.data() + (k + 1) * m_;
    double* lw_out = lw_.data() + (k + 1) * m_;
    for (std::size_t q = from; q < m_; ++q) {
      double* sq_row = srow_.data() + q * m_;
      double s = psi_[j * m_ + q];
      for (std::size_t t = 0; t < k; ++t) s -= sj[t] * sq_row[t];
      s /= lkk;
      sq_row[k] = s;
      sq_out[q] = sq_in[q] + s * s;
      lw_out[q] = lw_in[q] + s * wk;
    }
    ++level_;
    return true;
  }

  void pop() { --level_; }

 private:
  bool pivot(std::size_t j, double& d2, double& wk) const {
    const double pjj = psi_[j * m_ + j];
    d2 = pjj - sq_[level_ * m_ + j];
    if (!(pjj > 0.0) || d2 <= kDependentPivot * pjj) return false;
    wk = (c_[j] - lw_[level_ * m_ + j]) / std::sqrt(d2);
    return true;
  }

  const std::vector<double>& psi_;
  std::span<const double> c_;
  std::size_t m_;
  std::vector<double> srow_;  // row q: s(q) against the basis prefix
  std::vector<double> sq_;    // per level: |s(q)|^2
  std::vector<double> lw_;    // per level: <s(q), w>
  std::vector<double> w_;
  std::vector<double> explained_;
  std::size_t level_ = 0;
};

bool better(double explained, const std::vector<std::size_t>& support, const SizeBest& incumbent) {
  if (!incumbent.found) return true;
  if (explained != incumbent.explained) return explained > incumbent.explained;
  return support < incumbent.support;
}

void record(std::vector<SizeBest>& best, const std::vector<std::size_t>& support, double explained) {
  auto& slot = best[support.size()];
  if (better(explained, support, slot)) {
    slot.explained = explained;
    slot.support = support;
    slot.found = true;
  }
}

void dfs(CholeskyPath& path, std::vector<std::size_t>& support, std::size_t start, std::size_t m,
         std::vector<SizeBest>& best) {
  for (std::size_t j = start; j < m; ++j) {
    const bool in_basis = path.push(j, j + 1);
    support.push_back(j);
    record(best, support, path.explained());
    dfs(path, support, j + 1, m, best);
    support.pop_back();
    if (in_basis) path.pop();
  }
}

void merge_into(std::vector<SizeBest>& acc, const std::vector<SizeBest>& part) {
  for (std::size_t s = 0; s < acc.size(); ++s)
    if (part[s].found && better(part[s].explained, part[s].support, acc[s])) acc[s] = part[s];
}

}  // namespace

double enumeration_count(std::size_t m) { return std::ldexp(1.0, static_cast<int>(m)); }

std::vector<SizeBest> best_subsets_by_size(const std::vector<double>& psi, std::span<const double> c,
                                           std::size_t m, Exec exec) {
  if (psi.size() != m * m || c.size() != m) throw InvalidInput("best_subsets_by_size: dimension mismatch");
  std::vector<SizeBest> best(m + 1);

  // Task setup outweighs the walk for small M or a single thread.
  if (exec == Exec::serial || m < kParallelMinColumns || omp_get_max_threads() == 1) {
    CholeskyPath path(psi, c, m);
    std::vector<std::size_t> support;
    record(best, support, 0.0);
    dfs(path, support, 0, m, best);
    return best;
  }

  // Split on the include/exclude pattern of the first `split` indices; every
  // task appends columns in ascending order, so each support sees the same
  // floating-point operations as in the serial walk.
  const std::size_t split = std::min<std::size_t>(m, 8);
  const auto ntasks = static_cast<std::ptrdiff_t>(std::size_t{1} << split);
  std::vector<std::vector<SizeBest>> partial(static_cast<std::size_t>(ntasks));

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t task = 0; task < ntasks; ++task) {
    std::vector<SizeBest> local(m + 1);
    CholeskyPath path(psi, c, m);
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < split; ++j) {
      if ((static_cast<std::size_t>(task) >> j) & 1U) {
        path.push(j, j + 1);
        support.push_back(j);
      }
    }
    record(local, support, path.explained());
    dfs(path, support, split, m, local);
    partial[static_cast<std::size_t>(task)] = std::move(local);
  }
  for (const auto& part : partial) merge_into(best, part);
  return best;
}

std::vector<SizeBest> greedy_forward(const std::vector<double>& psi, std::span<const double> c, std::size_t m) {
  if (psi.size() != m * m || c.size() != m) throw InvalidInput("greedy_forward: dimension mismatch");
  std::vector<SizeBest> best(m + 1);
  CholeskyPath path(psi, c, m);
  std::vector<std::size_t> support;
  std::vector<bool> used(m, false);
  best[0] = {0.0, {}, true};
  for (std::size_t step = 1; step <= m; ++step) {
    std::size_t pick = m;
    double top = -1.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (used[j]) continue;
      const double g = path.trial_gain(j);
      if (g > top) {
        top = g;
        pick = j;
      }
    }
    used[pick] = true;
    path.push(pick, 0);
    support.push_back(pick);
    auto sorted = support;
    std::sort(sorted.begin(), sorted.end());
    best[step] = {path.explained(), std::move(sorted), true};
  }
  return best;
}

}  // namespace aggreg::kernels
