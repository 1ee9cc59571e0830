#include "rdpc/oracle/grid_search.hpp"

#include <cmath>
#include <stdexcept>

namespace rdpc::oracle {

namespace {

// All compositions of `units` into `parts` nonnegative integers.
void compositions(int units, int parts, std::vector<int>& current, std::vector<std::vector<int>>& out) {
    if (parts == 1) {
        current.push_back(units);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (int k = 0; k <= units; ++k) {
        current.push_back(k);
        compositions(units - k, parts - 1, current, out);
        current.pop_back();
    }
}

struct Candidate {
    double rate = kInf;
    std::vector<double> channel;
};

struct Enumeration {
    std::vector<std::vector<double>> rows;  // every admissible row
    long long total = 0;                    // rows^nx
};

Enumeration enumerate_rows(const DiscreteSource& source, double step) {
    const double units_f = 1.0 / step;
    const int units = static_cast<int>(std::lround(units_f));
    if (units < 1 || std::abs(units_f - units) > 1e-9) throw std::invalid_argument("grid step must divide 1");
    std::vector<std::vector<int>> comps;
    std::vector<int> cur;
    compositions(units, source.nxhat, cur, comps);
    Enumeration e;
    for (const auto& c : comps) {
        std::vector<double> row(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) row[i] = static_cast<double>(c[i]) / units;
        e.rows.push_back(std::move(row));
    }
    e.total = 1;
    for (int x = 0; x < source.nx; ++x) e.total *= static_cast<long long>(e.rows.size());
    return e;
}

// Evaluates every channel whose first row is rows[first]; keeps the best.
void scan_first_row(const DiscreteSource& source, const ConstraintPoint& point, const Enumeration& e, int first,
                    double tolerance, Candidate& best) {
    const int nx = source.nx, m = source.nxhat;
    const long long per_first = e.total / static_cast<long long>(e.rows.size());
    Channel w(nx, m);
    for (long long idx = 0; idx < per_first; ++idx) {
        long long rest = idx;
        std::copy(e.rows[first].begin(), e.rows[first].end(), w.data.begin());
        for (int x = 1; x < nx; ++x) {
            const auto& row = e.rows[rest % static_cast<long long>(e.rows.size())];
            rest /= static_cast<long long>(e.rows.size());
            std::copy(row.begin(), row.end(), w.data.begin() + x * m);
        }
        const auto values = constraint_values(source, w);
        if (max_violation(values, point) > tolerance) continue;
        const double rate = mutual_information(source.px, w);
        if (rate < best.rate) {
            best.rate = rate;
            best.channel = w.data;
        }
    }
}

GridSearchResult finish(const DiscreteSource& source, const Candidate& best, long long total) {
    GridSearchResult r;
    r.evaluated = total;
    if (std::isfinite(best.rate)) {
        r.status = SolveStatus::kOptimal;
        r.rate = best.rate;
        r.channel = Channel(source.nx, source.nxhat);
        r.channel.data = best.channel;
    }
    return r;
}

}  // namespace

GridSearchResult grid_search_rdpc(const DiscreteSource& source, const ConstraintPoint& point, double step,
                                  double tolerance) {
    source.require_valid();
    const auto e = enumerate_rows(source, step);
    const int firsts = static_cast<int>(e.rows.size());
    std::vector<Candidate> partial(firsts);
#pragma omp parallel for schedule(dynamic, 1)
    for (int f = 0; f < firsts; ++f) scan_first_row(source, point, e, f, tolerance, partial[f]);
    // Reduce in index order so ties resolve exactly as in the serial scan.
    Candidate best;
    for (auto& c : partial)
        if (c.rate < best.rate) best = std::move(c);
    return finish(source, best, e.total);
}

GridSearchResult grid_search_rdpc_serial(const DiscreteSource& source, const ConstraintPoint& point, double step,
                                         double tolerance) {
    source.require_valid();
    const auto e = enumerate_rows(source, step);
    Candidate best;
    for (int f = 0; f < static_cast<int>(e.rows.size()); ++f) {
        Candidate local;
        scan_first_row(source, point, e, f, tolerance, local);
        if (local.rate < best.rate) best = std::move(local);
    }
    return finish(source, best, e.total);
}

}  // namespace rdpc::oracle
