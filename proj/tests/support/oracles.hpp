#pragma once

// Reference implementations used only by tests. Each one is written from the
// model definitions and shares no code with the library: dense loops instead
// of sufficient statistics, 50-digit floats instead of doubles, enumeration
// instead of search.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;
using DenseCounts = std::vector<std::vector<long long>>;

inline Big big_log_factorial(long long n) {
  Big s = 0;
  for (long long k = 2; k <= n; ++k) s += boost::multiprecision::log(Big(k));
  return s;
}

// Poisson log-likelihood summed over every (worker, job) cell.
inline double dense_poisson_ll(const DenseCounts& A, const std::vector<std::uint32_t>& wg,
                               const std::vector<std::uint32_t>& jg, const Eigen::MatrixXd& P,
                               const std::vector<double>& dw, const std::vector<double>& dj) {
  Big total = 0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    for (std::size_t j = 0; j < A[i].size(); ++j) {
      const Big mean = Big(dw[i]) * Big(dj[j]) * Big(P(wg[i], jg[j]));
      if (A[i][j] > 0) {
        if (mean == 0) return -std::numeric_limits<double>::infinity();
        total += Big(A[i][j]) * boost::multiprecision::log(mean) - big_log_factorial(A[i][j]);
      }
      total -= mean;
    }
  }
  return static_cast<double>(total);
}

inline std::vector<double> row_sums(const DenseCounts& A) {
  std::vector<double> out;
  for (const auto& row : A) {
    long long s = 0;
    for (auto v : row) s += v;
    out.push_back(static_cast<double>(s));
  }
  return out;
}

inline std::vector<double> col_sums(const DenseCounts& A) {
  std::vector<double> out(A.empty() ? 0 : A[0].size(), 0.0);
  for (const auto& row : A)
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += static_cast<double>(row[j]);
  return out;
}

// Block counts over all cells divided by the product of group degree sums.
inline Eigen::MatrixXd dense_profile_p(const DenseCounts& A, const std::vector<std::uint32_t>& wg,
                                       const std::vector<std::uint32_t>& jg, int bw, int bj) {
  const auto dw = row_sums(A);
  const auto dj = col_sums(A);
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(bw, bj);
  Eigen::VectorXd Dw = Eigen::VectorXd::Zero(bw), Dj = Eigen::VectorXd::Zero(bj);
  for (std::size_t i = 0; i < A.size(); ++i) {
    Dw(wg[i]) += dw[i];
    for (std::size_t j = 0; j < A[i].size(); ++j) e(wg[i], jg[j]) += static_cast<double>(A[i][j]);
  }
  for (std::size_t j = 0; j < dj.size(); ++j) Dj(jg[j]) += dj[j];
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(bw, bj);
  for (int r = 0; r < bw; ++r)
    for (int t = 0; t < bj; ++t)
      if (Dw(r) > 0 && Dj(t) > 0) P(r, t) = e(r, t) / (Dw(r) * Dj(t));
  return P;
}

inline double log_binomial(double n, double k) {
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

// Description length in bits from its defining terms, nodes of zero degree
// excluded. Labels are arbitrary; groups are whatever labels occur.
inline double dense_description_length(const DenseCounts& A, const std::vector<std::uint32_t>& wg,
                                       const std::vector<std::uint32_t>& jg) {
  const auto dw = row_sums(A);
  const auto dj = col_sums(A);
  double E = 0;
  for (double d : dw) E += d;

  auto side_nats = [](const std::vector<double>& deg, const std::vector<std::uint32_t>& g,
                      std::map<std::uint32_t, std::pair<double, double>>& groups) {
    double n = 0;
    for (std::size_t v = 0; v < deg.size(); ++v) {
      if (deg[v] == 0) continue;
      n += 1;
      groups[g[v]].first += 1;
      groups[g[v]].second += deg[v];
    }
    const double B = static_cast<double>(groups.size());
    double nats = std::log(n) + log_binomial(n - 1, B - 1) + std::lgamma(n + 1);
    for (const auto& [label, sz] : groups) {
      nats -= std::lgamma(sz.first + 1);
      nats += log_binomial(sz.first + sz.second - 1, sz.second);
    }
    return nats;
  };
  std::map<std::uint32_t, std::pair<double, double>> gw, gj;
  double model = side_nats(dw, wg, gw) + side_nats(dj, jg, gj);
  const double cells = static_cast<double>(gw.size() * gj.size());
  model += log_binomial(cells + E - 1, E);

  std::map<std::uint32_t, int> rw, rj;
  for (const auto& [label, v] : gw) rw.emplace(label, static_cast<int>(rw.size()));
  for (const auto& [label, v] : gj) rj.emplace(label, static_cast<int>(rj.size()));
  std::vector<std::uint32_t> cw(wg.size(), 0), cj(jg.size(), 0);
  for (std::size_t i = 0; i < wg.size(); ++i) cw[i] = dw[i] > 0 ? rw[wg[i]] : 0;
  for (std::size_t j = 0; j < jg.size(); ++j) cj[j] = dj[j] > 0 ? rj[jg[j]] : 0;
  const int bw = std::max<int>(1, static_cast<int>(rw.size()));
  const int bj = std::max<int>(1, static_cast<int>(rj.size()));
  const auto P = dense_profile_p(A, cw, cj, bw, bj);
  const double data = -dense_poisson_ll(A, cw, cj, P, dw, dj);
  return (data + model) / std::log(2.0);
}

// Calls visit(labels) for every set partition of n items in
// restricted-growth form with at most max_groups groups.
inline void for_each_set_partition(std::size_t n, std::uint32_t max_groups,
                                   const std::function<void(const std::vector<std::uint32_t>&)>& visit) {
  std::vector<std::uint32_t> labels(n, 0);
  std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t pos, std::uint32_t used) {
    if (pos == n) {
      visit(labels);
      return;
    }
    for (std::uint32_t g = 0; g <= used && g < max_groups; ++g) {
      labels[pos] = g;
      rec(pos + 1, std::max(used, g + 1));
    }
  };
  if (n == 0) {
    visit(labels);
    return;
  }
  rec(0, 0);
}

struct ExhaustiveMinimum {
  double bits = std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> workers;
  std::vector<std::uint32_t> jobs;
};

// Minimum of bits(workers, jobs) over all partition pairs with bounded group
// counts.
inline ExhaustiveMinimum exhaustive_minimum(const DenseCounts& A, std::uint32_t max_worker_groups,
                                            std::uint32_t max_job_groups,
                                            const std::function<double(const std::vector<std::uint32_t>&,
                                                                       const std::vector<std::uint32_t>&)>& bits) {
  ExhaustiveMinimum best;
  const std::size_t nw = A.size();
  const std::size_t nj = A.empty() ? 0 : A[0].size();
  std::vector<std::vector<std::uint32_t>> job_partitions;
  for_each_set_partition(nj, max_job_groups, [&](const auto& l) { job_partitions.push_back(l); });
  for_each_set_partition(nw, max_worker_groups, [&](const std::vector<std::uint32_t>& w) {
    for (const auto& j : job_partitions) {
      const double b = bits(w, j);
      if (b < best.bits) best = {b, w, j};
    }
  });
  return best;
}

// Logit probabilities with an outside option at utility 0, outside first.
inline std::vector<double> softmax_with_outside(const std::vector<double>& utilities) {
  std::vector<Big> ex;
  Big denom = 1;
  for (double u : utilities) {
    ex.push_back(boost::multiprecision::exp(Big(u)));
    denom += ex.back();
  }
  std::vector<double> out{static_cast<double>(Big(1) / denom)};
  for (const auto& e : ex) out.push_back(static_cast<double>(e / denom));
  return out;
}

// Root of f on [lo, hi] with f(lo), f(hi) of opposite sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iterations = 200) {
  double flo = f(lo);
  for (int k = 0; k < iterations; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Adjusted Rand index from pair counts of the contingency table.
inline double adjusted_rand(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> cell;
  std::map<std::uint32_t, double> ra, rb;
  for (std::size_t k = 0; k < a.size(); ++k) {
    cell[{a[k], b[k]}] += 1;
    ra[a[k]] += 1;
    rb[b[k]] += 1;
  }
  auto c2 = [](double n) { return n * (n - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [k, v] : cell) index += c2(v);
  for (const auto& [k, v] : ra) sa += c2(v);
  for (const auto& [k, v] : rb) sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(a.size()));
  const double maximum = 0.5 * (sa + sb);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

struct LineFit {
  double intercept, slope, r2;
};

// Weighted least squares through the 2x2 normal equations at 50 digits.
inline LineFit normal_equations(const Eigen::VectorXd& y, const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
  Big sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const Big wk = w(k), xk = x(k), yk = y(k);
    sw += wk;
    sx += wk * xk;
    sy += wk * yk;
    sxx += wk * xk * xk;
    sxy += wk * xk * yk;
  }
  const Big det = sw * sxx - sx * sx;
  const Big b1 = (sw * sxy - sx * sy) / det;
  const Big b0 = (sy - b1 * sx) / sw;
  const Big ybar = sy / sw;
  Big rss = 0, tss = 0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const Big r = Big(y(k)) - b0 - b1 * Big(x(k));
    rss += Big(w(k)) * r * r;
    tss += Big(w(k)) * (Big(y(k)) - ybar) * (Big(y(k)) - ybar);
  }
  return {static_cast<double>(b0), static_cast<double>(b1), static_cast<double>(1 - rss / tss)};
}

// Pearson correlation of two equal-length vectors.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k] / n;
    mb += b[k] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

struct FilteredEdges {
  std::set<std::string> workers;
  std::set<std::string> jobs;
  std::size_t edges = 0;
};

// Keeps (worker, job) rows whose job has at least min_workers distinct
// workers, by direct counting.
inline FilteredEdges filter_edges(const std::vector<std::pair<std::string, std::string>>& rows,
                                  std::size_t min_workers) {
  std::map<std::string, std::set<std::string>> workers_of;
  for (const auto& [w, j] : rows) workers_of[j].insert(w);
  FilteredEdges out;
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& [w, j] : rows) {
    if (workers_of[j].size() < min_workers) continue;
    out.workers.insert(w);
    out.jobs.insert(j);
    pairs.emplace(w, j);
  }
  out.edges = pairs.size();
  return out;
}

}  // namespace oracle
