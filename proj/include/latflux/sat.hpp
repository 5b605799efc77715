#ifndef LATFLUX_SAT_HPP
#define LATFLUX_SAT_HPP

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace latflux::sat {

/// Clauses over variables 1..num_vars, literals in DIMACS convention.
struct Cnf {
    int num_vars = 0;
    std::vector<std::vector<int>> clauses;

    int new_var() { return ++num_vars; }
    void add(std::vector<int> clause) { clauses.push_back(std::move(clause)); }
};

inline void write_dimacs(std::ostream& os, const Cnf& cnf) {
    os << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << '\n';
    for (const auto& c : cnf.clauses) {
        for (int l : c) os << l << ' ';
        os << "0\n";
    }
}

inline Cnf read_dimacs(std::istream& is) {
    Cnf cnf;
    std::string line;
    std::vector<int> current;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == 'c' || line[0] == '%') continue;
        if (line[0] == 'p') {
            std::istringstream h(line);
            std::string p, fmt;
            std::size_t nclauses = 0;
            h >> p >> fmt >> cnf.num_vars >> nclauses;
            if (fmt != "cnf") throw std::runtime_error("not a cnf file");
            header = true;
            continue;
        }
        std::istringstream ls(line);
        int lit = 0;
        while (ls >> lit) {
            if (lit == 0) {
                cnf.clauses.push_back(current);
                current.clear();
            } else {
                cnf.num_vars = std::max(cnf.num_vars, std::abs(lit));
                current.push_back(lit);
            }
        }
    }
    if (!header) throw std::runtime_error("missing 'p cnf' header");
    if (!current.empty()) cnf.clauses.push_back(current);
    return cnf;
}

/// Reads a model as printed by common solvers ("v 1 -2 3 ... 0" lines or a
/// bare literal list).  Index 0 is unused.
inline std::vector<bool> read_model(std::istream& is, int num_vars) {
    std::vector<bool> model(static_cast<std::size_t>(num_vars) + 1, false);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == 'c' || line[0] == 's') continue;
        std::istringstream ls(line[0] == 'v' ? line.substr(1) : line);
        int lit = 0;
        while (ls >> lit)
            if (lit > 0 && lit <= num_vars) model[static_cast<std::size_t>(lit)] = true;
    }
    return model;
}

/// Sinz's sequential counter: at most k of `lits` are true.
inline void at_most_k(Cnf& cnf, const std::vector<int>& lits, std::size_t k) {
    const std::size_t n = lits.size();
    if (k >= n) return;
    if (k == 0) {
        for (int l : lits) cnf.add({-l});
        return;
    }
    // s[i][j]: at least j+1 of lits[0..i] are true
    std::vector<std::vector<int>> s(n - 1, std::vector<int>(k));
    for (auto& row : s)
        for (auto& v : row) v = cnf.new_var();
    cnf.add({-lits[0], s[0][0]});
    for (std::size_t j = 1; j < k; ++j) cnf.add({-s[0][j]});
    for (std::size_t i = 1; i + 1 < n; ++i) {
        cnf.add({-lits[i], s[i][0]});
        cnf.add({-s[i - 1][0], s[i][0]});
        for (std::size_t j = 1; j < k; ++j) {
            cnf.add({-lits[i], -s[i - 1][j - 1], s[i][j]});
            cnf.add({-s[i - 1][j], s[i][j]});
        }
        cnf.add({-lits[i], -s[i - 1][k - 1]});
    }
    cnf.add({-lits[n - 1], -s[n - 2][k - 1]});
}

enum class Result { Sat, Unsat, Unknown };

/// Conflict-driven clause-learning solver: two watched literals, first-UIP
/// learning with clause minimization, VSIDS, phase saving, Luby restarts and
/// LBD-based clause deletion.  Fully deterministic.  Clauses may be added
/// between calls to solve(), and solve() accepts assumptions.
class Solver {
public:
    Solver() = default;
    explicit Solver(const Cnf& cnf) {
        reserve(cnf.num_vars);
        for (const auto& c : cnf.clauses) add_clause(c);
    }

    int num_vars() const noexcept { return static_cast<int>(value_.size()); }
    int new_var() {
        reserve(num_vars() + 1);
        return num_vars();
    }
    void reserve(int n) {
        while (num_vars() < n) {
            value_.push_back(0);
            level_.push_back(0);
            reason_.push_back(kNone);
            phase_.push_back(0);
            activity_.push_back(0.0);
            seen_.push_back(0);
            heap_index_.push_back(-1);
            watches_.emplace_back();
            watches_.emplace_back();
            heap_insert(num_vars() - 1);
        }
    }

    /// Returns false once the clause set is known to be unsatisfiable.
    bool add_clause(std::vector<int> dimacs) {
        if (!ok_) return false;
        cancel_until(0);
        std::vector<Lit> lits;
        for (int d : dimacs) {
            if (d == 0) throw std::invalid_argument("literal 0 in clause");
            reserve(std::abs(d));
            lits.push_back(to_lit(d));
        }
        std::sort(lits.begin(), lits.end());
        std::vector<Lit> kept;
        for (std::size_t i = 0; i < lits.size(); ++i) {
            const Lit l = lits[i];
            if (i > 0 && l == lits[i - 1]) continue;
            if (i > 0 && l == (lits[i - 1] ^ 1)) return true; // tautology
            const int v = lit_value(l);
            if (v == 1) return true;
            if (v == -1) continue;
            kept.push_back(l);
        }
        if (kept.empty()) return ok_ = false;
        if (kept.size() == 1) {
            enqueue(kept[0], kNone);
            if (propagate() != kNone) ok_ = false;
            return ok_;
        }
        attach(store(std::move(kept), false, 0));
        return true;
    }

    Result solve(const std::vector<int>& assumptions = {}, std::int64_t conflict_budget = -1) {
        model_.clear();
        if (!ok_) return Result::Unsat;
        for (int a : assumptions) reserve(std::abs(a));
        assumptions_.clear();
        for (int a : assumptions) assumptions_.push_back(to_lit(a));
        std::int64_t conflicts = 0;
        for (int restart = 0;; ++restart) {
            const std::int64_t limit = static_cast<std::int64_t>(luby(restart) * 100.0);
            const Result r = search(limit, conflicts, conflict_budget);
            if (r != Result::Unknown) {
                if (r == Result::Sat) {
                    model_.assign(static_cast<std::size_t>(num_vars()) + 1, false);
                    for (int v = 0; v < num_vars(); ++v) model_[static_cast<std::size_t>(v) + 1] = value_[v] == 1;
                }
                cancel_until(0);
                return r;
            }
            if (conflict_budget >= 0 && conflicts >= conflict_budget) {
                cancel_until(0);
                return Result::Unknown;
            }
        }
    }

    /// Truth value of a variable in the last model (1-based).
    bool model_value(int var) const { return model_.at(static_cast<std::size_t>(var)); }
    const std::vector<bool>& model() const noexcept { return model_; }
    std::uint64_t conflicts() const noexcept { return stat_conflicts_; }
    std::uint64_t decisions() const noexcept { return stat_decisions_; }

private:
    using Lit = int; // 2 * var + negated
    static constexpr int kNone = -1;

    struct Clause {
        std::vector<Lit> lits;
        bool learnt = false;
        bool deleted = false;
        int lbd = 0;
        double activity = 0.0;
    };
    struct Watcher {
        int cref;
        Lit blocker;
    };

    static Lit to_lit(int d) { return 2 * (std::abs(d) - 1) + (d < 0 ? 1 : 0); }
    static int var_of(Lit l) { return l >> 1; }
    int lit_value(Lit l) const {
        const int v = value_[static_cast<std::size_t>(var_of(l))];
        return (l & 1) ? -v : v;
    }
    int decision_level() const { return static_cast<int>(trail_lim_.size()); }

    int store(std::vector<Lit> lits, bool learnt, int lbd) {
        Clause c;
        c.lits = std::move(lits);
        c.learnt = learnt;
        c.lbd = lbd;
        clauses_.push_back(std::move(c));
        if (learnt) ++num_learnts_;
        return static_cast<int>(clauses_.size()) - 1;
    }
    void attach(int cref) {
        const auto& c = clauses_[static_cast<std::size_t>(cref)];
        watches_[static_cast<std::size_t>(c.lits[0] ^ 1)].push_back({cref, c.lits[1]});
        watches_[static_cast<std::size_t>(c.lits[1] ^ 1)].push_back({cref, c.lits[0]});
    }

    void enqueue(Lit l, int reason) {
        const int v = var_of(l);
        value_[static_cast<std::size_t>(v)] = (l & 1) ? -1 : 1;
        level_[static_cast<std::size_t>(v)] = decision_level();
        reason_[static_cast<std::size_t>(v)] = reason;
        trail_.push_back(l);
    }

    int propagate() {
        int conflict = kNone;
        while (qhead_ < trail_.size() && conflict == kNone) {
            const Lit p = trail_[qhead_++];
            auto& ws = watches_[static_cast<std::size_t>(p)];
            const Lit false_lit = p ^ 1;
            std::size_t i = 0, j = 0;
            while (i < ws.size()) {
                const Watcher w = ws[i++];
                if (lit_value(w.blocker) == 1) {
                    ws[j++] = w;
                    continue;
                }
                Clause& c = clauses_[static_cast<std::size_t>(w.cref)];
                if (c.deleted) continue;
                if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
                const Lit first = c.lits[0];
                if (first != w.blocker && lit_value(first) == 1) {
                    ws[j++] = {w.cref, first};
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < c.lits.size(); ++k)
                    if (lit_value(c.lits[k]) != -1) {
                        std::swap(c.lits[1], c.lits[k]);
                        watches_[static_cast<std::size_t>(c.lits[1] ^ 1)].push_back({w.cref, first});
                        moved = true;
                        break;
                    }
                if (moved) continue;
                ws[j++] = {w.cref, first};
                if (lit_value(first) == -1) {
                    conflict = w.cref;
                    while (i < ws.size()) ws[j++] = ws[i++];
                } else {
                    enqueue(first, w.cref);
                }
            }
            ws.resize(j);
        }
        return conflict;
    }

    void bump_var(int v) {
        activity_[static_cast<std::size_t>(v)] += var_inc_;
        if (activity_[static_cast<std::size_t>(v)] > 1e100) {
            for (auto& a : activity_) a *= 1e-100;
            var_inc_ *= 1e-100;
        }
        if (heap_index_[static_cast<std::size_t>(v)] >= 0) heap_up(heap_index_[static_cast<std::size_t>(v)]);
    }
    void bump_clause(Clause& c) {
        c.activity += cla_inc_;
        if (c.activity > 1e20) {
            for (auto& cl : clauses_)
                if (cl.learnt) cl.activity *= 1e-20;
            cla_inc_ *= 1e-20;
        }
    }

    // Literal is implied by other literals already in the learnt clause.
    bool redundant(Lit l) {
        const int r = reason_[static_cast<std::size_t>(var_of(l))];
        if (r == kNone) return false;
        for (Lit q : clauses_[static_cast<std::size_t>(r)].lits) {
            const int v = var_of(q);
            if (v == var_of(l)) continue;
            if (!seen_[static_cast<std::size_t>(v)] && level_[static_cast<std::size_t>(v)] > 0) return false;
        }
        return true;
    }

    void analyze(int conflict, std::vector<Lit>& learnt, int& back_level, int& lbd) {
        learnt.assign(1, 0);
        int pending = 0;
        Lit p = -1;
        std::size_t index = trail_.size();
        std::vector<int> touched;
        do {
            Clause& c = clauses_[static_cast<std::size_t>(conflict)];
            if (c.learnt) bump_clause(c);
            for (Lit q : c.lits) {
                if (p != -1 && q == p) continue;
                const int v = var_of(q);
                if (seen_[static_cast<std::size_t>(v)] || level_[static_cast<std::size_t>(v)] == 0) continue;
                seen_[static_cast<std::size_t>(v)] = 1;
                touched.push_back(v);
                bump_var(v);
                if (level_[static_cast<std::size_t>(v)] >= decision_level())
                    ++pending;
                else
                    learnt.push_back(q);
            }
            while (!seen_[static_cast<std::size_t>(var_of(trail_[--index]))]) {
            }
            p = trail_[index];
            conflict = reason_[static_cast<std::size_t>(var_of(p))];
            --pending;
        } while (pending > 0);
        learnt[0] = p ^ 1;

        std::size_t keep = 1;
        for (std::size_t i = 1; i < learnt.size(); ++i)
            if (!redundant(learnt[i])) learnt[keep++] = learnt[i];
        learnt.resize(keep);

        back_level = 0;
        if (learnt.size() > 1) {
            std::size_t max_i = 1;
            for (std::size_t i = 2; i < learnt.size(); ++i)
                if (level_[static_cast<std::size_t>(var_of(learnt[i]))] >
                    level_[static_cast<std::size_t>(var_of(learnt[max_i]))])
                    max_i = i;
            std::swap(learnt[1], learnt[max_i]);
            back_level = level_[static_cast<std::size_t>(var_of(learnt[1]))];
        }
        std::vector<int> levels;
        for (Lit l : learnt) levels.push_back(level_[static_cast<std::size_t>(var_of(l))]);
        std::sort(levels.begin(), levels.end());
        lbd = static_cast<int>(std::unique(levels.begin(), levels.end()) - levels.begin());
        for (int v : touched) seen_[static_cast<std::size_t>(v)] = 0;
    }

    void cancel_until(int level) {
        if (decision_level() <= level) return;
        for (std::size_t i = trail_.size(); i-- > static_cast<std::size_t>(trail_lim_[static_cast<std::size_t>(level)]);) {
            const int v = var_of(trail_[i]);
            phase_[static_cast<std::size_t>(v)] = value_[static_cast<std::size_t>(v)];
            value_[static_cast<std::size_t>(v)] = 0;
            reason_[static_cast<std::size_t>(v)] = kNone;
            if (heap_index_[static_cast<std::size_t>(v)] < 0) heap_insert(v);
        }
        trail_.resize(static_cast<std::size_t>(trail_lim_[static_cast<std::size_t>(level)]));
        trail_lim_.resize(static_cast<std::size_t>(level));
        qhead_ = trail_.size();
    }

    Lit pick_branch() {
        while (!heap_.empty()) {
            const int v = heap_pop();
            if (value_[static_cast<std::size_t>(v)] == 0) return 2 * v + (phase_[static_cast<std::size_t>(v)] == 1 ? 0 : 1);
        }
        return -1;
    }

    void reduce_db() {
        std::vector<int> cand;
        std::vector<bool> locked(clauses_.size(), false);
        for (Lit l : trail_) {
            const int r = reason_[static_cast<std::size_t>(var_of(l))];
            if (r != kNone) locked[static_cast<std::size_t>(r)] = true;
        }
        for (std::size_t i = 0; i < clauses_.size(); ++i) {
            const Clause& c = clauses_[i];
            if (c.learnt && !c.deleted && !locked[i] && c.lbd > 2 && c.lits.size() > 2) cand.push_back(static_cast<int>(i));
        }
        std::sort(cand.begin(), cand.end(), [&](int a, int b) {
            const Clause& x = clauses_[static_cast<std::size_t>(a)];
            const Clause& y = clauses_[static_cast<std::size_t>(b)];
            if (x.lbd != y.lbd) return x.lbd > y.lbd;
            if (x.activity != y.activity) return x.activity < y.activity;
            return a < b;
        });
        for (std::size_t i = 0; i < cand.size() / 2; ++i) {
            Clause& c = clauses_[static_cast<std::size_t>(cand[i])];
            c.deleted = true;
            c.lits.clear();
            c.lits.shrink_to_fit();
            --num_learnts_;
        }
        for (auto& ws : watches_)
            ws.erase(std::remove_if(ws.begin(), ws.end(),
                                    [&](const Watcher& w) { return clauses_[static_cast<std::size_t>(w.cref)].deleted; }),
                     ws.end());
    }

    Result search(std::int64_t restart_limit, std::int64_t& conflicts, std::int64_t budget) {
        std::int64_t local = 0;
        std::vector<Lit> learnt;
        for (;;) {
            const int conflict = propagate();
            if (conflict != kNone) {
                ++stat_conflicts_;
                ++conflicts;
                ++local;
                if (decision_level() == 0) {
                    ok_ = false;
                    return Result::Unsat;
                }
                int back = 0, lbd = 0;
                analyze(conflict, learnt, back, lbd);
                cancel_until(back);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], kNone);
                } else {
                    const int cref = store(learnt, true, lbd);
                    attach(cref);
                    bump_clause(clauses_[static_cast<std::size_t>(cref)]);
                    enqueue(learnt[0], cref);
                }
                var_inc_ /= 0.95;
                cla_inc_ /= 0.999;
                continue;
            }
            if ((restart_limit >= 0 && local >= restart_limit) || (budget >= 0 && conflicts >= budget)) {
                cancel_until(0);
                return Result::Unknown;
            }
            if (num_learnts_ >= max_learnts_) {
                reduce_db();
                max_learnts_ += max_learnts_ / 10 + 500;
            }
            Lit next = -1;
            while (decision_level() < static_cast<int>(assumptions_.size())) {
                const Lit a = assumptions_[static_cast<std::size_t>(decision_level())];
                const int v = lit_value(a);
                if (v == 1) {
                    trail_lim_.push_back(static_cast<int>(trail_.size()));
                } else if (v == -1) {
                    return Result::Unsat; // under these assumptions
                } else {
                    next = a;
                    break;
                }
            }
            if (next == -1) {
                next = pick_branch();
                if (next == -1) return Result::Sat;
                ++stat_decisions_;
            }
            trail_lim_.push_back(static_cast<int>(trail_.size()));
            enqueue(next, kNone);
        }
    }

    static double luby(int i) {
        int size = 1, seq = 0;
        while (size < i + 1) {
            ++seq;
            size = 2 * size + 1;
        }
        double x = 1.0;
        while (size - 1 != i) {
            size = (size - 1) >> 1;
            --seq;
            i = i % size;
        }
        for (int k = 0; k < seq; ++k) x *= 2.0;
        return x;
    }

    // binary max-heap on activity, ties broken by lower variable index
    bool heap_less(int a, int b) const {
        const double x = activity_[static_cast<std::size_t>(a)], y = activity_[static_cast<std::size_t>(b)];
        return x != y ? x > y : a < b;
    }
    void heap_insert(int v) {
        heap_index_[static_cast<std::size_t>(v)] = static_cast<int>(heap_.size());
        heap_.push_back(v);
        heap_up(static_cast<int>(heap_.size()) - 1);
    }
    void heap_up(int i) {
        const int v = heap_[static_cast<std::size_t>(i)];
        while (i > 0) {
            const int parent = (i - 1) / 2;
            if (!heap_less(v, heap_[static_cast<std::size_t>(parent)])) break;
            heap_[static_cast<std::size_t>(i)] = heap_[static_cast<std::size_t>(parent)];
            heap_index_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(i)])] = i;
            i = parent;
        }
        heap_[static_cast<std::size_t>(i)] = v;
        heap_index_[static_cast<std::size_t>(v)] = i;
    }
    void heap_down(int i) {
        const int n = static_cast<int>(heap_.size());
        const int v = heap_[static_cast<std::size_t>(i)];
        for (;;) {
            int child = 2 * i + 1;
            if (child >= n) break;
            if (child + 1 < n && heap_less(heap_[static_cast<std::size_t>(child) + 1], heap_[static_cast<std::size_t>(child)]))
                ++child;
            if (!heap_less(heap_[static_cast<std::size_t>(child)], v)) break;
            heap_[static_cast<std::size_t>(i)] = heap_[static_cast<std::size_t>(child)];
            heap_index_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(i)])] = i;
            i = child;
        }
        heap_[static_cast<std::size_t>(i)] = v;
        heap_index_[static_cast<std::size_t>(v)] = i;
    }
    int heap_pop() {
        const int top = heap_.front();
        heap_index_[static_cast<std::size_t>(top)] = -1;
        const int last = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            heap_[0] = last;
            heap_index_[static_cast<std::size_t>(last)] = 0;
            heap_down(0);
        }
        return top;
    }

    bool ok_ = true;
    std::vector<Clause> clauses_;
    std::vector<std::vector<Watcher>> watches_;
    std::vector<int> value_;
    std::vector<int> level_;
    std::vector<int> reason_;
    std::vector<int> phase_;
    std::vector<double> activity_;
    std::vector<char> seen_;
    std::vector<int> heap_;
    std::vector<int> heap_index_;
    std::vector<Lit> trail_;
    std::vector<int> trail_lim_;
    std::vector<Lit> assumptions_;
    std::vector<bool> model_;
    std::size_t qhead_ = 0;
    double var_inc_ = 1.0;
    double cla_inc_ = 1.0;
    std::size_t num_learnts_ = 0;
    std::size_t max_learnts_ = 4000;
    std::uint64_t stat_conflicts_ = 0;
    std::uint64_t stat_decisions_ = 0;
};

} // namespace latflux::sat

#endif // LATFLUX_SAT_HPP
