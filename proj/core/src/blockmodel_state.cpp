#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "labornet/blockmodel.hpp"
#include "labornet/errors.hpp"
#include "math_util.hpp"

namespace labornet::sbm {

using detail::xlogx;

namespace {

constexpr std::uint32_t kOutside = std::numeric_limits<std::uint32_t>::max();
constexpr std::size_t kLogGammaTableLimit = std::size_t{1} << 22;
// Skips rounding-level ties in greedy mode.
constexpr double kTieTolerance = 1e-10;

Side other(Side side) { return side == Side::worker ? Side::job : Side::worker; }

double dbl(std::uint64_t x) { return static_cast<double>(x); }
double dbl(std::int64_t x) { return static_cast<double>(x); }

}  // namespace

BlockState::BlockState(const BipartiteGraph& graph, const Partition& partition,
                       std::uint32_t worker_capacity, std::uint32_t job_capacity)
    : graph_(&graph) {
  graph::check_dimensions(graph, partition);
  worker_capacity = std::max({worker_capacity, partition.num_worker_groups, 1u});
  job_capacity = std::max({job_capacity, partition.num_job_groups, 1u});
  job_capacity_ = job_capacity;

  auto init = [](SideData& d, std::span<const std::uint64_t> degree,
                 const std::vector<std::uint32_t>& labels, std::uint32_t cap) {
    d.slot.assign(degree.size(), kOutside);
    d.size.assign(cap, 0);
    d.total.assign(cap, 0);
    d.position.assign(cap, kOutside);
    for (std::size_t v = 0; v < degree.size(); ++v) {
      if (degree[v] == 0) continue;
      d.slot[v] = labels[v];
      d.size[labels[v]] += 1;
      d.total[labels[v]] += degree[v];
      d.movable.push_back(static_cast<Index>(v));
      ++d.active;
    }
    for (std::uint32_t r = 0; r < cap; ++r) {
      if (d.size[r] > 0) {
        d.position[r] = static_cast<std::uint32_t>(d.nonempty.size());
        d.nonempty.push_back(r);
      } else {
        d.empty.insert(r);
      }
    }
  };
  init(workers_, graph.worker_degrees(), partition.worker_group, worker_capacity);
  init(jobs_, graph.job_degrees(), partition.job_group, job_capacity);

  counts_.assign(static_cast<std::size_t>(worker_capacity) * job_capacity, 0);
  for (const auto& e : graph.edges()) {
    counts_[static_cast<std::size_t>(workers_.slot[e.worker]) * job_capacity_ + jobs_.slot[e.job]] +=
        e.count;
    edge_constant_ += e.count * std::log(dbl(graph.worker_degree(e.worker)) *
                                         dbl(graph.job_degree(e.job))) -
                      detail::log_gamma(e.count + 1.0);
  }

  const std::size_t needed = std::max(graph.num_workers(), graph.num_jobs()) +
                             graph.total_edges() + counts_.size() + 2;
  log_gamma_.resize(std::min(needed, kLogGammaTableLimit));
  for (std::size_t n = 1; n < log_gamma_.size(); ++n) log_gamma_[n] = detail::log_gamma(dbl(n));
  recompute();
}

double BlockState::log_gamma(std::uint64_t n) const {
  return n < log_gamma_.size() ? log_gamma_[n] : detail::log_gamma(dbl(n));
}

double BlockState::labels_nats(std::uint64_t n, std::uint64_t groups) const {
  if (n == 0) return 0.0;
  return std::log(dbl(n)) + log_gamma(n) - log_gamma(groups) - log_gamma(n - groups + 1) +
         log_gamma(n + 1);
}

double BlockState::group_nats(std::uint64_t size, std::uint64_t total) const {
  if (size == 0) return 0.0;
  return log_gamma(size + total) - log_gamma(total + 1) - log_gamma(size) - log_gamma(size + 1);
}

double BlockState::matrix_nats(std::uint64_t cells) const {
  if (cells == 0) return 0.0;
  const auto edges = graph_->total_edges();
  return log_gamma(cells + edges) - log_gamma(edges + 1) - log_gamma(cells);
}

std::int64_t BlockState::cell(Side side, std::uint32_t own, std::uint32_t other_slot) const {
  return side == Side::worker ? counts_[static_cast<std::size_t>(own) * job_capacity_ + other_slot]
                              : counts_[static_cast<std::size_t>(other_slot) * job_capacity_ + own];
}

std::int64_t& BlockState::cell(Side side, std::uint32_t own, std::uint32_t other_slot) {
  return side == Side::worker ? counts_[static_cast<std::size_t>(own) * job_capacity_ + other_slot]
                              : counts_[static_cast<std::size_t>(other_slot) * job_capacity_ + own];
}

double BlockState::recompute() {
  double ll = edge_constant_ - dbl(graph_->total_edges());
  double model = 0.0;
  for (auto r : workers_.nonempty) {
    for (auto t : jobs_.nonempty) ll += xlogx(dbl(cell(Side::worker, r, t)));
  }
  for (const SideData* d : {&workers_, &jobs_}) {
    model += labels_nats(d->active, d->nonempty.size());
    for (auto r : d->nonempty) {
      ll -= xlogx(dbl(d->total[r]));
      model += group_nats(d->size[r], d->total[r]);
    }
  }
  model += matrix_nats(static_cast<std::uint64_t>(workers_.nonempty.size()) * jobs_.nonempty.size());
  bits_ = (model - ll) / std::numbers::ln2;
  return bits_;
}

std::uint32_t BlockState::group_of(Side side, Index node) const { return data(side).slot[node]; }
bool BlockState::movable(Side side, Index node) const { return data(side).slot[node] != kOutside; }
std::uint32_t BlockState::num_groups(Side side) const {
  return static_cast<std::uint32_t>(data(side).nonempty.size());
}
std::uint32_t BlockState::capacity(Side side) const {
  return static_cast<std::uint32_t>(data(side).size.size());
}
std::uint64_t BlockState::active_nodes(Side side) const { return data(side).active; }
const std::vector<Index>& BlockState::movable_nodes(Side side) const { return data(side).movable; }
const std::vector<std::uint32_t>& BlockState::nonempty_groups(Side side) const {
  return data(side).nonempty;
}
std::uint32_t BlockState::empty_group(Side side) const {
  const auto& d = data(side);
  return d.empty.empty() ? capacity(side) : *d.empty.begin();
}
std::uint64_t BlockState::group_size(Side side, std::uint32_t group) const {
  return data(side).size[group];
}
std::uint64_t BlockState::group_total(Side side, std::uint32_t group) const {
  return data(side).total[group];
}
std::int64_t BlockState::block_count(std::uint32_t worker_group, std::uint32_t job_group) const {
  return cell(Side::worker, worker_group, job_group);
}

void BlockState::load_context(Side side, Index node, NodeContext& ctx) const {
  ctx.side = side;
  ctx.node = node;
  ctx.from = data(side).slot[node];
  ctx.groups.clear();
  const auto neighbors = side == Side::worker ? graph_->worker_neighbors(node)
                                              : graph_->job_neighbors(node);
  const auto& o = data(other(side));
  ctx.degree = 0;
  for (const auto& n : neighbors) {
    const auto t = o.slot[n.node];
    ctx.degree += n.count;
    auto it = std::find_if(ctx.groups.begin(), ctx.groups.end(),
                           [t](const auto& g) { return g.first == t; });
    if (it == ctx.groups.end()) {
      ctx.groups.emplace_back(t, n.count);
    } else {
      it->second += n.count;
    }
  }
}

double BlockState::move_delta(const NodeContext& ctx, std::uint32_t to) const {
  const auto r = ctx.from;
  const auto s = to;
  if (r == s) return 0.0;
  const auto& d = data(ctx.side);
  const auto& o = data(other(ctx.side));
  const auto k = ctx.degree;

  double dll = 0.0;
  for (const auto& [t, c] : ctx.groups) {
    const auto a = cell(ctx.side, r, t);
    const auto b = cell(ctx.side, s, t);
    const auto cc = static_cast<std::int64_t>(c);
    dll += xlogx(dbl(a - cc)) - xlogx(dbl(a)) + xlogx(dbl(b + cc)) - xlogx(dbl(b));
  }
  const auto tr = d.total[r];
  const auto ts = d.total[s];
  dll -= xlogx(dbl(tr - k)) - xlogx(dbl(tr)) + xlogx(dbl(ts + k)) - xlogx(dbl(ts));

  const auto nr = d.size[r];
  const auto ns = d.size[s];
  const std::uint64_t groups = d.nonempty.size();
  const std::uint64_t groups_after = groups - (nr == 1 ? 1 : 0) + (ns == 0 ? 1 : 0);
  const std::uint64_t other_groups = o.nonempty.size();
  double dmodel = labels_nats(d.active, groups_after) - labels_nats(d.active, groups);
  dmodel += group_nats(nr - 1, tr - k) - group_nats(nr, tr) + group_nats(ns + 1, ts + k) -
            group_nats(ns, ts);
  dmodel += matrix_nats(groups_after * other_groups) - matrix_nats(groups * other_groups);
  return (dmodel - dll) / std::numbers::ln2;
}

void BlockState::set_size(SideData& d, std::uint32_t slot, std::uint64_t size) {
  const auto old = d.size[slot];
  d.size[slot] = size;
  if (old == 0 && size > 0) {
    d.empty.erase(slot);
    d.position[slot] = static_cast<std::uint32_t>(d.nonempty.size());
    d.nonempty.push_back(slot);
  } else if (old > 0 && size == 0) {
    const auto pos = d.position[slot];
    const auto last = d.nonempty.back();
    d.nonempty[pos] = last;
    d.position[last] = pos;
    d.nonempty.pop_back();
    d.position[slot] = kOutside;
    d.empty.insert(slot);
  }
}

void BlockState::apply_move(const NodeContext& ctx, std::uint32_t to) {
  const auto r = ctx.from;
  if (r == to) return;
  const double delta = move_delta(ctx, to);
  auto& d = data(ctx.side);
  for (const auto& [t, c] : ctx.groups) {
    cell(ctx.side, r, t) -= static_cast<std::int64_t>(c);
    cell(ctx.side, to, t) += static_cast<std::int64_t>(c);
  }
  d.total[r] -= ctx.degree;
  d.total[to] += ctx.degree;
  set_size(d, to, d.size[to] + 1);
  set_size(d, r, d.size[r] - 1);
  d.slot[ctx.node] = to;
  bits_ += delta;
}

double BlockState::merge_delta(Side side, std::uint32_t keep, std::uint32_t absorb) const {
  const auto& d = data(side);
  const auto& o = data(other(side));
  double dll = 0.0;
  for (auto t : o.nonempty) {
    const double a = dbl(cell(side, keep, t));
    const double b = dbl(cell(side, absorb, t));
    dll += xlogx(a + b) - xlogx(a) - xlogx(b);
  }
  const auto ta = d.total[keep];
  const auto tb = d.total[absorb];
  dll -= xlogx(dbl(ta + tb)) - xlogx(dbl(ta)) - xlogx(dbl(tb));
  const std::uint64_t groups = d.nonempty.size();
  const std::uint64_t other_groups = o.nonempty.size();
  const auto na = d.size[keep];
  const auto nb = d.size[absorb];
  double dmodel = labels_nats(d.active, groups - 1) - labels_nats(d.active, groups);
  dmodel += group_nats(na + nb, ta + tb) - group_nats(na, ta) - group_nats(nb, tb);
  dmodel += matrix_nats((groups - 1) * other_groups) - matrix_nats(groups * other_groups);
  return (dmodel - dll) / std::numbers::ln2;
}

void BlockState::apply_merge(Side side, std::uint32_t keep, std::uint32_t absorb) {
  if (keep == absorb) return;
  const double delta = merge_delta(side, keep, absorb);
  auto& d = data(side);
  for (std::uint32_t t = 0; t < capacity(other(side)); ++t) {
    cell(side, keep, t) += cell(side, absorb, t);
    cell(side, absorb, t) = 0;
  }
  for (auto v : d.movable) {
    if (d.slot[v] == absorb) d.slot[v] = keep;
  }
  d.total[keep] += d.total[absorb];
  d.total[absorb] = 0;
  set_size(d, keep, d.size[keep] + d.size[absorb]);
  set_size(d, absorb, 0);
  bits_ += delta;
}

Partition BlockState::partition() const {
  auto side_labels = [](const SideData& d) {
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    std::vector<std::uint32_t> labels(d.slot.size(), 0);
    bool isolated = false;
    for (std::size_t v = 0; v < d.slot.size(); ++v) {
      if (d.slot[v] == kOutside) {
        isolated = true;
        continue;
      }
      auto [it, inserted] = remap.emplace(d.slot[v], static_cast<std::uint32_t>(remap.size()));
      labels[v] = it->second;
    }
    const auto groups = static_cast<std::uint32_t>(remap.size());
    if (isolated) {
      for (std::size_t v = 0; v < d.slot.size(); ++v) {
        if (d.slot[v] == kOutside) labels[v] = groups;
      }
    }
    return std::pair{labels, groups + (isolated ? 1u : 0u)};
  };
  Partition p;
  std::tie(p.worker_group, p.num_worker_groups) = side_labels(workers_);
  std::tie(p.job_group, p.num_job_groups) = side_labels(jobs_);
  return p;
}

bool BlockState::consistent(double tolerance) const {
  std::vector<std::int64_t> fresh(counts_.size(), 0);
  for (const auto& e : graph_->edges()) {
    fresh[static_cast<std::size_t>(workers_.slot[e.worker]) * job_capacity_ + jobs_.slot[e.job]] +=
        e.count;
  }
  if (fresh != counts_) return false;
  for (const SideData* d : {&workers_, &jobs_}) {
    std::vector<std::uint64_t> size(d->size.size(), 0);
    for (auto v : d->movable) ++size[d->slot[v]];
    if (size != d->size) return false;
  }
  const double expected = description_length(*graph_, partition()).total();
  return std::abs(expected - bits_) <= tolerance * std::max(1.0, std::abs(expected));
}

SweepStats mcmc_sweep(BlockState& state, const SweepOptions& options, Rng& rng) {
  std::vector<std::pair<Side, Index>> order;
  for (Side side : {Side::worker, Side::job}) {
    for (auto v : state.movable_nodes(side)) order.emplace_back(side, v);
  }
  std::shuffle(order.begin(), order.end(), rng);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SweepStats stats;
  NodeContext ctx;
  const double eps = options.epsilon;
  for (const auto& [side, v] : order) {
    ++stats.proposed;
    state.load_context(side, v, ctx);
    const auto& groups = state.nonempty_groups(side);
    const std::uint32_t cap = state.capacity(side);
    const auto B = static_cast<std::uint32_t>(groups.size());
    const std::uint32_t candidates = B + (B < cap ? 1 : 0);
    const Side o = side == Side::worker ? Side::job : Side::worker;

    std::uint32_t to = ctx.from;
    if (unit(rng) < eps) {
      const auto pick = std::uniform_int_distribution<std::uint32_t>(0, candidates - 1)(rng);
      to = pick < B ? groups[pick] : state.empty_group(side);
    } else {
      double u = unit(rng) * static_cast<double>(ctx.degree);
      std::uint32_t t = ctx.groups.back().first;
      for (const auto& [g, c] : ctx.groups) {
        if (u < static_cast<double>(c)) {
          t = g;
          break;
        }
        u -= static_cast<double>(c);
      }
      const auto column_total = static_cast<double>(state.group_total(o, t));
      double w = unit(rng) * column_total;
      to = groups.back();
      for (auto s : groups) {
        const double c = static_cast<double>(side == Side::worker ? state.block_count(s, t)
                                                                  : state.block_count(t, s));
        if (w < c) {
          to = s;
          break;
        }
        w -= c;
      }
    }
    if (to == ctx.from) continue;
    const auto from_size = state.group_size(side, ctx.from);
    const auto to_size = state.group_size(side, to);
    if (from_size == 1 && to_size == 0) continue;
    const std::uint32_t min_groups =
        side == Side::worker ? options.min_worker_groups : options.min_job_groups;
    if (from_size == 1 && B <= min_groups) continue;

    const double delta = state.move_delta(ctx, to);
    bool accept = false;
    if (options.temperature <= 0.0) {
      accept = delta <= kTieTolerance;
    } else {
      double log_ratio = -delta * std::numbers::ln2 / options.temperature;
      if (options.hastings) {
        auto neighbor_mass = [&](std::uint32_t g, bool after) {
          double mass = 0.0;
          for (const auto& [t, c] : ctx.groups) {
            double count = static_cast<double>(side == Side::worker ? state.block_count(g, t)
                                                                    : state.block_count(t, g));
            if (after) count -= static_cast<double>(c);
            mass += static_cast<double>(c) * count / static_cast<double>(state.group_total(o, t));
          }
          return mass / static_cast<double>(ctx.degree);
        };
        const std::uint32_t B_after = B - (from_size == 1 ? 1 : 0) + (to_size == 0 ? 1 : 0);
        const std::uint32_t candidates_after = B_after + (B_after < cap ? 1 : 0);
        const double forward = eps / candidates + (1.0 - eps) * neighbor_mass(to, false);
        const double reverse = eps / candidates_after + (1.0 - eps) * neighbor_mass(ctx.from, true);
        log_ratio += std::log(reverse / forward);
      }
      accept = log_ratio >= 0.0 || std::log(unit(rng)) < log_ratio;
    }
    if (accept) {
      state.apply_move(ctx, to);
      ++stats.accepted;
    }
  }
  return stats;
}

std::size_t greedy_merge(BlockState& state, Side side, std::uint32_t min_groups) {
  std::size_t merges = 0;
  while (state.num_groups(side) > std::max(min_groups, 1u)) {
    auto groups = state.nonempty_groups(side);
    std::sort(groups.begin(), groups.end());
    double best = -kTieTolerance;
    std::pair<std::uint32_t, std::uint32_t> pick{0, 0};
    bool found = false;
    for (std::size_t a = 0; a < groups.size(); ++a) {
      for (std::size_t b = a + 1; b < groups.size(); ++b) {
        const double d = state.merge_delta(side, groups[a], groups[b]);
        if (d < best) {
          best = d;
          pick = {groups[a], groups[b]};
          found = true;
        }
      }
    }
    if (!found) break;
    state.apply_merge(side, pick.first, pick.second);
    ++merges;
  }
  return merges;
}

}  // namespace labornet::sbm
