#include "fpp/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>

#include "fpp/rng.hpp"

namespace fpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double target_distance(const TargetSet& target, Point2 p) {
  return closest_point(target, p).distance;
}

// Liang-Barsky style clip of p + t d against the window over t in [t0, t1].
bool clipped_nonempty(Point2 p, Point2 d, double t0, double t1, const Window& w) {
  const double lo[2] = {w.xmin, w.ymin};
  const double hi[2] = {w.xmax, w.ymax};
  const double pp[2] = {p.x, p.y};
  const double dd[2] = {d.x, d.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (dd[axis] == 0.0) {
      if (pp[axis] < lo[axis] || pp[axis] > hi[axis]) return false;
      continue;
    }
    double ta = (lo[axis] - pp[axis]) / dd[axis];
    double tb = (hi[axis] - pp[axis]) / dd[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

bool target_intersects_window(const TargetSet& target, const Window& w) {
  if (const auto* sp = std::get_if<SinglePoint>(&target)) return w.contains(sp->p);
  if (const auto* seg = std::get_if<Segment>(&target))
    return clipped_nonempty(seg->a, seg->b - seg->a, 0.0, 1.0, w);
  const auto& line = std::get<Line>(target);
  return clipped_nonempty(line.origin, line.direction, -1e300, 1e300, w);
}

struct Ctx {
  const GeodesicProblem* pb = nullptr;
  const PointConfig* cfg = nullptr;
  double s = 1.0;
  double tol = 1e-9;
  double base_d = 0.0;       // start-to-target distance
  Point2 base_q;             // terminal of the straight pointless path
  double base_action = 0.0;
  std::vector<int32_t> cands;
};

Ctx make_ctx(const GeodesicProblem& pb, bool with_candidates = true) {
  validate_options(pb.options);
  if (pb.config == nullptr) throw Error("GeodesicProblem: missing configuration");
  Ctx ctx;
  ctx.pb = &pb;
  ctx.cfg = pb.config;
  ctx.s = pb.params.s;
  ctx.tol = pb.options.action_tolerance;
  const Closest c = closest_point(pb.target, pb.start);
  ctx.base_d = c.distance;
  ctx.base_q = c.q;
  ctx.base_action = ctx.base_d * ctx.base_d / (2.0 * ctx.s);
  if (with_candidates) ctx.cands = candidate_points(pb);
  return ctx;
}

PathSolution baseline_solution(const Ctx& ctx, bool optimal) {
  PathSolution sol;
  sol.path = PathSeq{ctx.pb->start, {}, ctx.base_q};
  sol.action = ctx.base_action;
  sol.length = ctx.base_d;
  sol.n_points = 0;
  sol.optimal = optimal;
  sol.candidates_used = 0;
  return sol;
}

// ---------------------------------------------------------------------------
// Exact search: Held-Karp subset DP over (subset, last point), minimizing the
// path length per state. For fixed N the action L^2/(2s) - N is strictly
// increasing in L, so the shortest representative dominates every state.
// ---------------------------------------------------------------------------

struct ExactEval {
  double action = kInf;
  int n = 0;
  uint32_t mask = 0;
  int last = -1;  // -1 encodes the pointless baseline path
};

PathSolution solve_exact_impl(const Ctx& ctx) {
  const GeodesicProblem& pb = *ctx.pb;
  const int m = static_cast<int>(ctx.cands.size());
  if (m > pb.options.max_exact_points)
    throw TooManyCandidates(
        "exact search supports at most " + std::to_string(pb.options.max_exact_points) +
        " candidate points, got " + std::to_string(m) +
        "; use the heuristic solver for this instance");

  PathSolution sol = baseline_solution(ctx, true);
  sol.candidates_used = m;
  sol.log.prune_hits = ctx.cfg->size() - m;
  if (m == 0) return sol;

  std::vector<Point2> pt(m);
  std::vector<double> dstart(m), dterm(m);
  std::vector<Point2> qterm(m);
  for (int i = 0; i < m; ++i) {
    pt[i] = ctx.cfg->points()[ctx.cands[i]];
    dstart[i] = dist(pb.start, pt[i]);
    const Closest c = closest_point(pb.target, pt[i]);
    dterm[i] = c.distance;
    qterm[i] = c.q;
  }
  std::vector<double> d(static_cast<size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) d[static_cast<size_t>(i) * m + j] = dist(pt[i], pt[j]);

  const size_t nmask = size_t{1} << m;
  std::vector<double> min_len(nmask * m, kInf);
  std::vector<int8_t> parent(nmask * m, -1);
  for (int j = 0; j < m; ++j) min_len[(size_t{1} << j) * m + j] = dstart[j];

  for (size_t mask = 1; mask < nmask; ++mask) {
    for (int j = 0; j < m; ++j) {
      if (!(mask >> j & 1)) continue;
      const double len = min_len[mask * m + j];
      if (len == kInf) continue;
      ++sol.log.states_expanded;
      const double* dj = d.data() + static_cast<size_t>(j) * m;
      for (int k = 0; k < m; ++k) {
        if (mask >> k & 1) continue;
        const size_t idx = (mask | size_t{1} << k) * m + k;
        const double cand = len + dj[k];
        if (cand < min_len[idx]) {
          min_len[idx] = cand;
          parent[idx] = static_cast<int8_t>(j);
        } else if (cand == min_len[idx] && static_cast<int8_t>(j) < parent[idx]) {
          parent[idx] = static_cast<int8_t>(j);  // deterministic reconstruction
        }
      }
    }
  }

  // pass 1: the optimal action value
  double best = ctx.base_action;
  for (size_t mask = 1; mask < nmask; ++mask) {
    const int n = std::popcount(mask);
    for (int j = 0; j < m; ++j) {
      if (!(mask >> j & 1)) continue;
      const double len = min_len[mask * m + j];
      if (len == kInf) continue;
      const double total = len + dterm[j];
      best = std::min(best, total * total / (2.0 * ctx.s) - n);
    }
  }

  // pass 2: among optima within tolerance, smallest N, then the
  // lexicographically smallest interior index sequence
  auto reconstruct = [&](uint32_t mask, int j) {
    std::vector<int32_t> seq;
    size_t mk = mask;
    int cur = j;
    while (cur >= 0) {
      seq.push_back(ctx.cands[cur]);
      const int prev = parent[mk * m + cur];
      mk &= ~(size_t{1} << cur);
      cur = prev;
    }
    std::reverse(seq.begin(), seq.end());
    return seq;
  };

  ExactEval chosen;  // baseline default
  chosen.action = ctx.base_action;
  std::vector<int32_t> chosen_seq;
  bool have = ctx.base_action <= best + ctx.tol;
  double chosen_total = ctx.base_d;

  for (size_t mask = 1; mask < nmask; ++mask) {
    const int n = std::popcount(mask);
    for (int j = 0; j < m; ++j) {
      if (!(mask >> j & 1)) continue;
      const double len = min_len[mask * m + j];
      if (len == kInf) continue;
      const double total = len + dterm[j];
      const double act = total * total / (2.0 * ctx.s) - n;
      if (act > best + ctx.tol) continue;
      if (have) {
        if (n > chosen.n) continue;
        if (n == chosen.n) {
          std::vector<int32_t> seq = reconstruct(static_cast<uint32_t>(mask), j);
          if (!(seq < chosen_seq)) continue;
          chosen = {act, n, static_cast<uint32_t>(mask), j};
          chosen_seq = std::move(seq);
          chosen_total = total;
          continue;
        }
      }
      chosen = {act, n, static_cast<uint32_t>(mask), j};
      chosen_seq = reconstruct(static_cast<uint32_t>(mask), j);
      chosen_total = total;
      have = true;
    }
  }

  if (chosen.last >= 0) {
    sol.path.interior = chosen_seq;
    sol.path.terminal = qterm[chosen.last];
    sol.action = chosen.action;
    sol.length = chosen_total;
    sol.n_points = chosen.n;
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Brute force: all subsets in all orders. Oracle for the DP.
// ---------------------------------------------------------------------------

struct BruteBest {
  bool have = false;
  double action = kInf;
  std::vector<int32_t> seq;
  double total_len = 0.0;
  int last = -1;
};

void brute_rec(const Ctx& ctx, const std::vector<Point2>& pt,
               const std::vector<double>& dterm, std::vector<int>& seq, uint32_t used,
               double len, BruteBest& best, SolverLog& log) {
  const int m = static_cast<int>(pt.size());
  const int n = static_cast<int>(std::popcount(used));
  ++log.states_expanded;

  const double total = len + (n == 0 ? ctx.base_d : dterm[seq.back()]);
  const double act = total * total / (2.0 * ctx.s) - n;
  bool take = false;
  if (!best.have || act < best.action - ctx.tol) {
    take = true;
  } else if (act <= best.action + ctx.tol) {
    std::vector<int32_t> ids(seq.size());
    for (size_t i = 0; i < seq.size(); ++i) ids[i] = ctx.cands[seq[i]];
    if (n < static_cast<int>(best.seq.size()) ||
        (n == static_cast<int>(best.seq.size()) && ids < best.seq))
      take = true;
  }
  if (take) {
    best.have = true;
    best.action = act;
    best.seq.resize(seq.size());
    for (size_t i = 0; i < seq.size(); ++i) best.seq[i] = ctx.cands[seq[i]];
    best.total_len = total;
    best.last = n == 0 ? -1 : seq.back();
  }

  const Point2 cur = n == 0 ? ctx.pb->start : pt[seq.back()];
  for (int k = 0; k < m; ++k) {
    if (used >> k & 1) continue;
    seq.push_back(k);
    brute_rec(ctx, pt, dterm, seq, used | (1u << k), len + dist(cur, pt[k]), best, log);
    seq.pop_back();
  }
}

PathSolution brute_force_impl(const Ctx& ctx) {
  constexpr int kBruteCap = 9;
  const int m = static_cast<int>(ctx.cands.size());
  if (m > kBruteCap)
    throw TooManyCandidates("brute force enumerates at most " +
                            std::to_string(kBruteCap) + " candidates, got " +
                            std::to_string(m));

  PathSolution sol = baseline_solution(ctx, true);
  sol.candidates_used = m;
  sol.log.prune_hits = ctx.cfg->size() - m;
  if (m == 0) return sol;

  std::vector<Point2> pt(m);
  std::vector<double> dterm(m);
  std::vector<Point2> qterm(m);
  for (int i = 0; i < m; ++i) {
    pt[i] = ctx.cfg->points()[ctx.cands[i]];
    const Closest c = closest_point(ctx.pb->target, pt[i]);
    dterm[i] = c.distance;
    qterm[i] = c.q;
  }

  BruteBest best;
  std::vector<int> seq;
  brute_rec(ctx, pt, dterm, seq, 0, 0.0, best, sol.log);

  sol.action = best.action;
  sol.length = best.total_len;
  sol.n_points = static_cast<int>(best.seq.size());
  sol.path.interior = best.seq;
  sol.path.terminal = best.last < 0 ? ctx.base_q : qterm[best.last];
  return sol;
}

// ---------------------------------------------------------------------------
// Local search
// ---------------------------------------------------------------------------

struct Move {
  enum Kind { kNone, kInsert, kRemove, kRelocate, kTwoOpt } kind = kNone;
  int a = 0;        // position / edge
  int b = 0;        // second position (relocate target slot, 2-opt end)
  int32_t cand = -1;
  double delta_len = 0.0;
  double delta_action = 0.0;
};

class LocalSearch {
 public:
  LocalSearch(const Ctx& ctx, const PathSeq& initial, uint64_t move_seed,
              bool best_improvement)
      : ctx_(ctx),
        cfg_(*ctx.cfg),
        rng_(move_seed),
        best_improvement_(best_improvement) {
    is_cand_.assign(cfg_.size(), 0);
    for (int32_t idx : ctx_.cands) is_cand_[idx] = 1;
    used_.assign(cfg_.size(), 0);
    order_ = initial.interior;
    for (int32_t idx : order_) {
      if (idx < 0 || idx >= cfg_.size()) throw BadIndex("initial path index out of range");
      if (used_[idx]) throw BadIndex("initial path repeats an interior index");
      used_[idx] = 1;
    }
    const int span = cfg_.cells_x() * cfg_.cells_y();
    stamp_.assign(static_cast<size_t>(std::max(span, 1)), 0);
    refresh_length();
  }

  PathSolution run(SolverLog& log) {
    while (true) {
      Move mv = best_improvement_ ? find_best_move() : find_first_move();
      if (mv.kind == Move::kNone) break;
      apply(mv);
      ++log.moves_applied;
      if (log.moves_applied > 10'000'000)
        throw Error("local search failed to terminate");
    }
    log.states_expanded += evals_;

    PathSolution sol;
    const int n = static_cast<int>(order_.size());
    sol.path.start = ctx_.pb->start;
    sol.path.interior = order_;
    sol.path.terminal =
        n == 0 ? ctx_.base_q : closest_point(ctx_.pb->target, vertex(n)).q;
    sol.length = length_;
    sol.action = action();
    sol.n_points = n;
    sol.optimal = false;
    sol.candidates_used = static_cast<int>(ctx_.cands.size());
    return sol;
  }

 private:
  Point2 vertex(int i) const {
    return i == 0 ? ctx_.pb->start : cfg_.points()[order_[i - 1]];
  }

  double term_dist(int i) const { return target_distance(ctx_.pb->target, vertex(i)); }

  void refresh_length() {
    const int n = static_cast<int>(order_.size());
    double len = 0.0;
    for (int i = 0; i < n; ++i) len += dist(vertex(i), vertex(i + 1));
    len += term_dist(n);
    length_ = len;
  }

  double action() const {
    return length_ * length_ / (2.0 * ctx_.s) - static_cast<double>(order_.size());
  }

  double delta_action_for(double delta_len, double reward) const {
    return (2.0 * length_ + delta_len) * delta_len / (2.0 * ctx_.s) - reward;
  }

  // Longest extra length an insertion may add and still pay for its point.
  double insertion_len_cap() const {
    return 2.0 * ctx_.s / (std::sqrt(length_ * length_ + 2.0 * ctx_.s) + length_) +
           1e-9;
  }

  double removal_delta_len(int k) const {
    const int n = static_cast<int>(order_.size());
    const Point2 a = vertex(k - 1);
    const Point2 p = vertex(k);
    if (k < n) return dist(a, vertex(k + 1)) - dist(a, p) - dist(p, vertex(k + 1));
    return target_distance(ctx_.pb->target, a) - dist(a, p) - term_dist(n);
  }

  double insertion_delta_len(int edge, Point2 q) const {
    const int n = static_cast<int>(order_.size());
    const Point2 a = vertex(edge);
    if (edge < n) return dist(a, q) + dist(q, vertex(edge + 1)) - dist(a, vertex(edge + 1));
    return dist(a, q) + target_distance(ctx_.pb->target, q) - term_dist(n);
  }

  // Enumerate unused candidates that could give an improving insertion on the
  // given edge: 8-connected cell walk over the lens where the detour can stay
  // under the cap, with a per-cell lower bound on the detour length.
  template <class F>
  void scan_insertable(int edge, double cap, F&& f) {
    const int n = static_cast<int>(order_.size());
    const Point2 a = vertex(edge);
    const bool terminal = edge >= n;
    const Point2 b = terminal ? Point2{} : vertex(edge + 1);
    const double ref = terminal ? term_dist(n) : dist(a, b);
    constexpr double kHalfDiag = 0.70710678118654757;

    const int i0 = cfg_.cell_imin(), j0 = cfg_.cell_jmin();
    const int nx = cfg_.cells_x(), ny = cfg_.cells_y();
    if (nx <= 0 || ny <= 0) return;
    auto clamp_cell = [&](Cell c) {
      return Cell{std::clamp(c.first, i0, i0 + nx - 1),
                  std::clamp(c.second, j0, j0 + ny - 1)};
    };
    auto flat = [&](Cell c) {
      return static_cast<size_t>(c.second - j0) * nx + static_cast<size_t>(c.first - i0);
    };
    auto lower_bound_ok = [&](Cell c) {
      const Point2 center{static_cast<double>(c.first), static_cast<double>(c.second)};
      const double da = std::max(0.0, dist(a, center) - kHalfDiag);
      const double db = std::max(
          0.0, (terminal ? target_distance(ctx_.pb->target, center) : dist(center, b)) -
                   kHalfDiag);
      return da + db - ref <= cap;
    };

    ++gen_;
    std::deque<Cell> queue;
    const Cell start = clamp_cell(PointConfig::unit_cell(a));
    stamp_[flat(start)] = gen_;
    queue.push_back(start);
    while (!queue.empty()) {
      const Cell c = queue.front();
      queue.pop_front();
      if (!lower_bound_ok(c)) continue;
      for (int32_t idx : cfg_.cell(c.first, c.second)) {
        if (is_cand_[idx] && !used_[idx]) f(idx);
      }
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const Cell nb{c.first + di, c.second + dj};
          if (nb.first < i0 || nb.first >= i0 + nx || nb.second < j0 ||
              nb.second >= j0 + ny)
            continue;
          const size_t fi = flat(nb);
          if (stamp_[fi] == gen_) continue;
          stamp_[fi] = gen_;
          queue.push_back(nb);
        }
    }
  }

  template <class F>
  void for_each_move(F&& consider) {
    const int n = static_cast<int>(order_.size());
    const double cap = insertion_len_cap();

    // insertions
    for (int edge = 0; edge <= n; ++edge) {
      scan_insertable(edge, cap, [&](int32_t idx) {
        ++evals_;
        const double dl = insertion_delta_len(edge, cfg_.points()[idx]);
        const double da = delta_action_for(dl, 1.0);
        if (da < -ctx_.tol)
          consider(Move{Move::kInsert, edge, 0, idx, dl, da});
      });
    }
    // removals
    for (int k = 1; k <= n; ++k) {
      ++evals_;
      const double dl = removal_delta_len(k);
      const double da = delta_action_for(dl, -1.0);
      if (da < -ctx_.tol) consider(Move{Move::kRemove, k, 0, -1, dl, da});
    }
    // relocations: remove position k, reinsert into slot m of the reduced path
    for (int k = 1; k <= n; ++k) {
      const double dl_rem = removal_delta_len(k);
      const Point2 p = vertex(k);
      auto reduced_vertex = [&](int i) { return vertex(i < k ? i : i + 1); };
      for (int mslot = 0; mslot <= n - 1; ++mslot) {
        if (mslot == k - 1) continue;  // same place
        ++evals_;
        const Point2 a = reduced_vertex(mslot);
        double dl_ins;
        if (mslot < n - 1) {
          const Point2 b = reduced_vertex(mslot + 1);
          dl_ins = dist(a, p) + dist(p, b) - dist(a, b);
        } else {
          dl_ins = dist(a, p) + target_distance(ctx_.pb->target, p) -
                   target_distance(ctx_.pb->target, reduced_vertex(n - 1));
        }
        const double da = delta_action_for(dl_rem + dl_ins, 0.0);
        if (da < -ctx_.tol)
          consider(Move{Move::kRelocate, k, mslot, -1, dl_rem + dl_ins, da});
      }
    }
    // 2-opt segment reversals
    for (int k = 1; k < n; ++k) {
      for (int mpos = k + 1; mpos <= n; ++mpos) {
        ++evals_;
        double dl = dist(vertex(k - 1), vertex(mpos)) - dist(vertex(k - 1), vertex(k));
        if (mpos < n)
          dl += dist(vertex(k), vertex(mpos + 1)) - dist(vertex(mpos), vertex(mpos + 1));
        else
          dl += target_distance(ctx_.pb->target, vertex(k)) -
                target_distance(ctx_.pb->target, vertex(mpos));
        const double da = delta_action_for(dl, 0.0);
        if (da < -ctx_.tol) consider(Move{Move::kTwoOpt, k, mpos, -1, dl, da});
      }
    }
  }

  Move find_best_move() {
    Move best;
    for_each_move([&](const Move& mv) {
      if (best.kind == Move::kNone || mv.delta_action < best.delta_action) best = mv;
    });
    return best;
  }

  // Restarts perturb the move order: collect the improving moves of this pass
  // and accept one at a seeded random rank among the better half.
  Move find_first_move() {
    std::vector<Move> improving;
    for_each_move([&](const Move& mv) { improving.push_back(mv); });
    if (improving.empty()) return {};
    std::sort(improving.begin(), improving.end(),
              [](const Move& x, const Move& y) { return x.delta_action < y.delta_action; });
    const size_t k = 1 + (improving.size() - 1) / 2;
    return improving[rng_.uniform_int(k)];
  }

  void apply(const Move& mv) {
    switch (mv.kind) {
      case Move::kInsert:
        order_.insert(order_.begin() + mv.a, mv.cand);
        used_[mv.cand] = 1;
        break;
      case Move::kRemove:
        used_[order_[mv.a - 1]] = 0;
        order_.erase(order_.begin() + (mv.a - 1));
        break;
      case Move::kRelocate: {
        const int32_t idx = order_[mv.a - 1];
        order_.erase(order_.begin() + (mv.a - 1));
        order_.insert(order_.begin() + mv.b, idx);
        break;
      }
      case Move::kTwoOpt:
        std::reverse(order_.begin() + (mv.a - 1), order_.begin() + mv.b);
        break;
      case Move::kNone:
        break;
    }
    refresh_length();
  }

  const Ctx& ctx_;
  const PointConfig& cfg_;
  Rng rng_;
  bool best_improvement_;
  std::vector<int32_t> order_;
  std::vector<char> is_cand_;
  std::vector<char> used_;
  std::vector<uint32_t> stamp_;
  uint32_t gen_ = 0;
  double length_ = 0.0;
  int64_t evals_ = 0;
};

PathSolution local_search_impl(const Ctx& ctx, const PathSeq& initial,
                               uint64_t move_seed, bool best_improvement,
                               SolverLog& log) {
  LocalSearch ls(ctx, initial, move_seed, best_improvement);
  return ls.run(log);
}

bool solution_better(const PathSolution& a, const PathSolution& b, double tol) {
  if (a.action < b.action - tol) return true;
  if (a.action > b.action + tol) return false;
  if (a.n_points != b.n_points) return a.n_points < b.n_points;
  return a.path.interior < b.path.interior;
}

PathSolution solve_heuristic_impl(const Ctx& ctx) {
  const GeodesicProblem& pb = *ctx.pb;
  const PathSeq straight{pb.start, {}, ctx.base_q};

  PathSolution best;
  SolverLog log;
  log.prune_hits = ctx.cfg->size() - static_cast<int>(ctx.cands.size());
  for (int r = 0; r < pb.options.heuristic_restarts; ++r) {
    PathSolution sol = local_search_impl(
        ctx, straight, mix_seed(pb.options.heuristic_seed, static_cast<uint64_t>(r)),
        /*best_improvement=*/r == 0, log);
    if (r == 0 || solution_better(sol, best, ctx.tol)) best = sol;
  }
  best.log = log;
  best.optimal = false;
  best.candidates_used = static_cast<int>(ctx.cands.size());
  return best;
}

}  // namespace

void validate_options(const SolverOptions& options) {
  if (options.max_exact_points < 0 || options.max_exact_points > 24)
    throw BadSpec("max_exact_points must lie in [0, 24]");
  if (options.heuristic_restarts < 1) throw BadSpec("heuristic_restarts must be >= 1");
  if (!(options.action_tolerance > 0.0)) throw BadSpec("action_tolerance must be positive");
}

GeodesicProblem make_problem(const PointConfig& config, Point2 start, TargetSet target,
                             ActionParams params, SolverOptions options) {
  validate_options(options);
  make_params(params.s);
  if (!config.window().contains(start)) throw BadWindow("start lies outside the window");
  if (!target_intersects_window(target, config.window()))
    throw BadTarget("target does not intersect the window");
  return GeodesicProblem{&config, start, std::move(target), params, options};
}

double baseline_action(const GeodesicProblem& problem) {
  const Ctx ctx = make_ctx(problem, /*with_candidates=*/false);
  return ctx.base_action;
}

std::vector<int32_t> candidate_points(const GeodesicProblem& problem) {
  validate_options(problem.options);
  if (problem.config == nullptr) throw Error("GeodesicProblem: missing configuration");
  const PointConfig& cfg = *problem.config;
  const double s = problem.params.s;
  const Closest c = closest_point(problem.target, problem.start);
  const double baseline = c.distance * c.distance / (2.0 * s);
  const double n_cap = static_cast<double>(cfg.size());
  const double len_cap = std::sqrt(2.0 * s * (n_cap + baseline)) + 1e-12;

  std::vector<int32_t> keep;
  for (int32_t idx = 0; idx < cfg.size(); ++idx) {
    const Point2 p = cfg.points()[idx];
    const double e = dist(problem.start, p) + target_distance(problem.target, p);
    if (e <= len_cap) keep.push_back(idx);
  }
  return keep;
}

PathSolution solve_exact(const GeodesicProblem& problem) {
  return solve_exact_impl(make_ctx(problem));
}

PathSolution brute_force(const GeodesicProblem& problem) {
  return brute_force_impl(make_ctx(problem));
}

PathSolution solve_heuristic(const GeodesicProblem& problem) {
  return solve_heuristic_impl(make_ctx(problem));
}

PathSolution local_search_from(const GeodesicProblem& problem, const PathSeq& initial,
                               uint64_t move_seed, bool best_improvement) {
  const Ctx ctx = make_ctx(problem);
  SolverLog log;
  PathSolution sol = local_search_impl(ctx, initial, move_seed, best_improvement, log);
  sol.log = log;
  return sol;
}

PathSolution solve(const GeodesicProblem& problem) {
  const Ctx ctx = make_ctx(problem);
  switch (problem.options.force_mode) {
    case SolveMode::Exact:
      return solve_exact_impl(ctx);
    case SolveMode::Heuristic:
      return solve_heuristic_impl(ctx);
    case SolveMode::Auto:
      break;
  }
  if (static_cast<int>(ctx.cands.size()) <= problem.options.max_exact_points)
    return solve_exact_impl(ctx);
  return solve_heuristic_impl(ctx);
}

std::set<Cell> touched_boxes(const PathSolution& solution, const PointConfig& config,
                             int K) {
  if (K < 1 || K % 2 == 0) throw BadBoxSize("box side must be a positive odd integer");
  std::set<Cell> cells;
  for (int32_t idx : solution.path.interior) {
    const Point2 p = config.point(idx);
    cells.insert({static_cast<int>(std::floor(p.x / K + 0.5)),
                  static_cast<int>(std::floor(p.y / K + 0.5))});
  }
  return cells;
}

std::vector<Cell> traced_cells(const std::vector<Point2>& polyline, int K) {
  if (K < 1 || K % 2 == 0) throw BadBoxSize("box side must be a positive odd integer");
  if (polyline.empty()) throw EmptyPath("traced_cells: empty polyline");

  const double k = static_cast<double>(K);
  auto cell_of = [&](Point2 p) {
    return Cell{static_cast<int>(std::floor(p.x / k + 0.5)),
                static_cast<int>(std::floor(p.y / k + 0.5))};
  };

  std::vector<Cell> out;
  out.push_back(cell_of(polyline.front()));
  auto emit = [&](Cell c) {
    if (out.back() != c) out.push_back(c);
  };

  for (size_t seg = 0; seg + 1 < polyline.size(); ++seg) {
    const Point2 p = polyline[seg];
    const Point2 q = polyline[seg + 1];
    Cell cur = out.back();
    const Cell dst = cell_of(q);
    const double dx = q.x - p.x;
    const double dy = q.y - p.y;
    const int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
    const int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);

    while (cur != dst) {
      double tx = kInf, ty = kInf;
      if (sx != 0 && cur.first != dst.first)
        tx = (k * (cur.first + sx * 0.5) - p.x) / dx;
      if (sy != 0 && cur.second != dst.second)
        ty = (k * (cur.second + sy * 0.5) - p.y) / dy;

      if (tx > 1.0 && ty > 1.0) {
        // numeric fallback when an endpoint sits on a boundary: bridge with
        // axis steps, x before y
        while (cur.first != dst.first) {
          cur.first += cur.first < dst.first ? 1 : -1;
          emit(cur);
        }
        while (cur.second != dst.second) {
          cur.second += cur.second < dst.second ? 1 : -1;
          emit(cur);
        }
        break;
      }
      if (tx == ty) {  // exact corner crossing: x step first
        cur.first += sx;
        emit(cur);
        if (cur != dst) {
          cur.second += sy;
          emit(cur);
        }
      } else if (tx < ty) {
        cur.first += sx;
        emit(cur);
      } else {
        cur.second += sy;
        emit(cur);
      }
    }
  }
  return out;
}

std::vector<Cell> traced_lattice_path(const PathSolution& solution,
                                      const PointConfig& config, int K) {
  return traced_cells(path_vertices(solution.path, config), K);
}

}  // namespace fpp
