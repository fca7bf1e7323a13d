#include "somlab/categorical.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace somlab {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t start = 0;
        while (start < cell.size() && cell[start] == ' ') ++start;
        cells.push_back(cell.substr(start));
    }
    return cells;
}

}  // namespace

ContingencyTable ContingencyTable::from_counts(std::vector<std::int64_t> counts,
                                               std::vector<std::string> row_labels,
                                               std::vector<std::string> col_labels) {
    ContingencyTable t;
    t.p = static_cast<int>(row_labels.size());
    t.q = static_cast<int>(col_labels.size());
    if (t.p < 1 || t.q < 1) throw IngestionError("contingency table needs rows and columns");
    if (counts.size() != static_cast<std::size_t>(t.p) * t.q)
        throw IngestionError("contingency counts do not match the label counts");
    t.total = 0;
    for (std::int64_t c : counts) {
        if (c < 0) throw IngestionError("contingency counts must be nonnegative");
        t.total += c;
    }
    if (t.total <= 0) throw IngestionError("contingency table grand total must be positive");
    t.counts = std::move(counts);
    t.row_labels = std::move(row_labels);
    t.col_labels = std::move(col_labels);
    return t;
}

ContingencyTable ContingencyTable::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open contingency file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IngestionError("contingency file is empty: " + path);
    auto header = split_csv_line(line);
    if (header.size() < 2) throw IngestionError("contingency header needs column labels");
    std::vector<std::string> col_labels(header.begin() + 1, header.end());
    std::vector<std::string> row_labels;
    std::vector<std::int64_t> counts;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != col_labels.size() + 1)
            throw IngestionError(path + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(col_labels.size() + 1) + " cells");
        row_labels.push_back(cells[0]);
        for (std::size_t j = 1; j < cells.size(); ++j) {
            try {
                counts.push_back(std::stoll(cells[j]));
            } catch (const std::exception&) {
                throw IngestionError(path + ":" + std::to_string(lineno) +
                                     ": not an integer: " + cells[j]);
            }
        }
    }
    return from_counts(std::move(counts), std::move(row_labels), std::move(col_labels));
}

double ContingencyTable::row_mass(int i) const {
    std::int64_t s = 0;
    for (int j = 0; j < q; ++j) s += at(i, j);
    return static_cast<double>(s) / static_cast<double>(total);
}

double ContingencyTable::col_mass(int j) const {
    std::int64_t s = 0;
    for (int i = 0; i < p; ++i) s += at(i, j);
    return static_cast<double>(s) / static_cast<double>(total);
}

Vec ContingencyTable::row_profile(int i) const {
    std::int64_t s = 0;
    for (int j = 0; j < q; ++j) s += at(i, j);
    if (s == 0) throw UsageError("row " + row_labels[static_cast<std::size_t>(i)] + " is all zero");
    Vec r(static_cast<std::size_t>(q));
    for (int j = 0; j < q; ++j)
        r[static_cast<std::size_t>(j)] = static_cast<double>(at(i, j)) / static_cast<double>(s);
    return r;
}

Vec ContingencyTable::col_profile(int j) const {
    std::int64_t s = 0;
    for (int i = 0; i < p; ++i) s += at(i, j);
    if (s == 0) throw UsageError("column " + col_labels[static_cast<std::size_t>(j)] + " is all zero");
    Vec c(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i)
        c[static_cast<std::size_t>(i)] = static_cast<double>(at(i, j)) / static_cast<double>(s);
    return c;
}

ResponseTable ResponseTable::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open responses file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IngestionError("responses file is empty: " + path);
    ResponseTable rt;
    rt.questions = split_csv_line(line);
    if (rt.questions.empty()) throw IngestionError("responses header has no questions");
    rt.modality_labels.resize(rt.questions.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != rt.questions.size())
            throw IngestionError(path + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(rt.questions.size()) + " answers");
        std::vector<int> row(rt.questions.size());
        for (std::size_t k = 0; k < cells.size(); ++k) {
            auto& labels = rt.modality_labels[k];
            const auto it = std::find(labels.begin(), labels.end(), cells[k]);
            if (it == labels.end()) {
                labels.push_back(cells[k]);
                row[k] = static_cast<int>(labels.size()) - 1;
            } else {
                row[k] = static_cast<int>(it - labels.begin());
            }
        }
        rt.answers.push_back(std::move(row));
    }
    return rt;
}

BurtTable build_burt(const ResponseTable& responses) {
    const int K = responses.n_questions();
    const int N = responses.n_individuals();
    if (K < 1) throw IngestionError("Burt table needs at least one question");
    if (N < 1) throw IngestionError("Burt table needs at least one individual");

    BurtTable bt;
    bt.K = K;
    bt.individuals = N;
    bt.modalities_per_question.resize(static_cast<std::size_t>(K));
    std::vector<int> offset(static_cast<std::size_t>(K));
    int M = 0;
    for (int k = 0; k < K; ++k) {
        offset[static_cast<std::size_t>(k)] = M;
        const int mk = static_cast<int>(responses.modality_labels[static_cast<std::size_t>(k)].size());
        if (mk < 1) throw IngestionError("question " + responses.questions[static_cast<std::size_t>(k)] +
                                         " has no modalities");
        bt.modalities_per_question[static_cast<std::size_t>(k)] = mk;
        for (int a = 0; a < mk; ++a) {
            bt.labels.push_back(responses.questions[static_cast<std::size_t>(k)] + "=" +
                                responses.modality_labels[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)]);
            bt.question_of.push_back(k);
        }
        M += mk;
    }
    bt.M = M;
    bt.b.assign(static_cast<std::size_t>(M) * M, 0);

    for (int r = 0; r < N; ++r) {
        const auto& row = responses.answers[static_cast<std::size_t>(r)];
        for (int k = 0; k < K; ++k) {
            const int a = row[static_cast<std::size_t>(k)];
            if (a < 0 || a >= bt.modalities_per_question[static_cast<std::size_t>(k)])
                throw IngestionError("row " + std::to_string(r) + ", question " +
                                     responses.questions[static_cast<std::size_t>(k)] +
                                     ": invalid modality index " + std::to_string(a));
        }
        for (int k = 0; k < K; ++k) {
            const int s = offset[static_cast<std::size_t>(k)] + row[static_cast<std::size_t>(k)];
            for (int l = 0; l < K; ++l) {
                const int t = offset[static_cast<std::size_t>(l)] + row[static_cast<std::size_t>(l)];
                bt.b[static_cast<std::size_t>(s) * M + t] += 1;
            }
        }
    }
    return bt;
}

bool BurtTable::check_invariants() const {
    for (int s = 0; s < M; ++s)
        for (int t = 0; t < M; ++t)
            if (at(s, t) != at(t, s)) return false;
    // Diagonal blocks are diagonal and off-block row sums reproduce the
    // diagonal counts: each individual answers every question exactly once.
    int off_k = 0;
    for (std::size_t k = 0; k < modalities_per_question.size(); ++k) {
        const int mk = modalities_per_question[k];
        int off_l = 0;
        for (std::size_t l = 0; l < modalities_per_question.size(); ++l) {
            const int ml = modalities_per_question[l];
            for (int a = 0; a < mk; ++a) {
                std::int64_t row_sum = 0;
                for (int c = 0; c < ml; ++c) {
                    const std::int64_t v = at(off_k + a, off_l + c);
                    row_sum += v;
                    if (k == l && a != c && v != 0) return false;
                }
                if (k != l && row_sum != at(off_k + a, off_k + a)) return false;
            }
            off_l += ml;
        }
        off_k += mk;
    }
    std::int64_t diag = 0;
    for (int t = 0; t < M; ++t) diag += at(t, t);
    return diag == individuals * K;
}

double chi2_distance_sq(std::span<const double> u, std::span<const double> v,
                        std::span<const double> masses) {
    if (u.size() != v.size() || u.size() != masses.size())
        throw UsageError("chi2 distance needs equal-length profiles and masses");
    double s = 0.0;
    for (std::size_t t = 0; t < u.size(); ++t) {
        if (!(masses[t] > 0.0))
            throw UsageError("chi2 mass at coordinate " + std::to_string(t) +
                             " is not positive (modality never observed)");
        s += sq(u[t] - v[t]) / masses[t];
    }
    return s;
}

double chi2_distance(std::span<const double> u, std::span<const double> v,
                     std::span<const double> masses) {
    return std::sqrt(chi2_distance_sq(u, v, masses));
}

std::vector<Vec> korresp_build_D(const ContingencyTable& t) {
    const int p = t.p;
    const int q = t.q;
    for (int i = 0; i < p; ++i)
        if (t.row_mass(i) == 0.0) throw UsageError("row " + t.row_labels[static_cast<std::size_t>(i)] + " is all zero");
    for (int j = 0; j < q; ++j)
        if (t.col_mass(j) == 0.0) throw UsageError("column " + t.col_labels[static_cast<std::size_t>(j)] + " is all zero");

    std::vector<Vec> D;
    D.reserve(static_cast<std::size_t>(p + q));
    for (int i = 0; i < p; ++i) {
        // j(i): most probable column given row i; ties to the lowest index.
        int jbest = 0;
        for (int j = 1; j < q; ++j)
            if (t.at(i, j) > t.at(i, jbest)) jbest = j;
        Vec row = t.row_profile(i);
        const Vec cj = t.col_profile(jbest);
        row.insert(row.end(), cj.begin(), cj.end());
        D.push_back(std::move(row));
    }
    for (int j = 0; j < q; ++j) {
        int ibest = 0;
        for (int i = 1; i < p; ++i)
            if (t.at(i, j) > t.at(ibest, j)) ibest = i;
        Vec row = t.row_profile(ibest);
        const Vec cj = t.col_profile(j);
        row.insert(row.end(), cj.begin(), cj.end());
        D.push_back(std::move(row));
    }
    return D;
}

double CategoricalConfig::gain_at(std::uint64_t t) const {
    const auto organize_steps =
        static_cast<std::uint64_t>(organize_fraction * static_cast<double>(steps));
    if (organize_eps > 0.0 && t < organize_steps) return organize_eps;
    return schedule.gain(t - (organize_eps > 0.0 ? organize_steps : 0));
}

int ModalityMap::unit_of(const std::string& label) const {
    for (const auto& e : entries)
        if (e.label == label) return e.unit;
    throw UsageError("unknown modality label: " + label);
}

namespace {

int chi2_winner(const NetworkState& s, std::span<const double> x, std::span<const double> masses,
                std::size_t offset) {
    int best = 0;
    double best_d = -1.0;
    for (int i = 0; i < s.units(); ++i) {
        const auto wi = s.unit(i).subspan(offset, x.size());
        double d = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) d += sq(x[k] - wi[k]) / masses[k];
        if (best_d < 0.0 || d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

ModalityMap korresp_run(const ContingencyTable& table, const CategoricalConfig& config) {
    const int p = table.p;
    const int q = table.q;
    const std::vector<Vec> D = korresp_build_D(table);
    const int dim = q + p;

    Vec row_masses(static_cast<std::size_t>(p));
    Vec col_masses(static_cast<std::size_t>(q));
    for (int i = 0; i < p; ++i) row_masses[static_cast<std::size_t>(i)] = table.row_mass(i);
    for (int j = 0; j < q; ++j) col_masses[static_cast<std::size_t>(j)] = table.col_mass(j);
    // Full-vector variant: block-wise reference masses, concatenated.
    Vec full_masses = col_masses;
    full_masses.insert(full_masses.end(), row_masses.begin(), row_masses.end());

    RandomStream rng(config.seed);
    NetworkState s = NetworkState::from_weights(config.lattice, dim, [&] {
        Vec w(static_cast<std::size_t>(config.lattice.units()) * dim);
        for (auto& v : w) v = rng.uniform01();
        return w;
    }());

    auto find_winner = [&](int row_index) {
        const Vec& x = D[static_cast<std::size_t>(row_index)];
        if (config.full_vector_winner) return chi2_winner(s, x, full_masses, 0);
        if (row_index < p)  // row input: compare the variable-2 profile block
            return chi2_winner(s, std::span<const double>(x).subspan(0, static_cast<std::size_t>(q)),
                               col_masses, 0);
        return chi2_winner(s, std::span<const double>(x).subspan(static_cast<std::size_t>(q)),
                           row_masses, static_cast<std::size_t>(q));
    };

    for (std::uint64_t t = 0; t < config.steps; ++t) {
        const int idx = (t % 2 == 0) ? static_cast<int>(rng.index(static_cast<std::size_t>(p)))
                                     : p + static_cast<int>(rng.index(static_cast<std::size_t>(q)));
        const int i0 = find_winner(idx);
        apply_update(s, D[static_cast<std::size_t>(idx)], config.gain_at(s.time), config.lambda,
                     i0);
        ++s.time;
    }

    ModalityMap map;
    map.lattice = config.lattice;
    for (int i = 0; i < p; ++i)
        map.entries.push_back({table.row_labels[static_cast<std::size_t>(i)], "row", find_winner(i)});
    for (int j = 0; j < q; ++j)
        map.entries.push_back({table.col_labels[static_cast<std::size_t>(j)], "col", find_winner(p + j)});
    map.final_state = std::move(s);
    return map;
}

ModalityMap kacm_run(const BurtTable& burt, const CategoricalConfig& config) {
    const int M = burt.M;
    ModalityMap map;
    map.lattice = config.lattice;

    std::vector<int> included;
    for (int t = 0; t < M; ++t) {
        if (burt.modality_count(t) > 0)
            included.push_back(t);
        else
            map.warnings.push_back("modality " + burt.labels[static_cast<std::size_t>(t)] +
                                   " never observed; excluded");
    }
    if (included.empty()) throw UsageError("no observed modalities");

    // Normalized rows (profiles), masses = overall modality frequencies,
    // and the count-proportional sampling law.
    const double denom = static_cast<double>(burt.individuals) * burt.K;
    std::vector<Vec> rows(included.size());
    Vec masses(included.size());
    Vec cum(included.size());
    double acc = 0.0;
    for (std::size_t r = 0; r < included.size(); ++r) {
        const int t = included[r];
        std::int64_t row_sum = 0;
        for (int c = 0; c < M; ++c) row_sum += burt.at(t, c);
        Vec row(included.size());
        for (std::size_t cidx = 0; cidx < included.size(); ++cidx)
            row[cidx] = static_cast<double>(burt.at(t, included[cidx])) / static_cast<double>(row_sum);
        rows[r] = std::move(row);
        masses[r] = static_cast<double>(burt.modality_count(t)) / denom;
        acc += masses[r];
        cum[r] = acc;
    }
    // Excluded coordinates carry no mass; renormalize the sampling law.
    for (auto& v : cum) v /= acc;

    const int dim = static_cast<int>(included.size());
    RandomStream rng(config.seed);
    NetworkState s = NetworkState::from_weights(config.lattice, dim, [&] {
        Vec w(static_cast<std::size_t>(config.lattice.units()) * dim);
        for (auto& v : w) v = rng.uniform01();
        return w;
    }());

    auto draw_row = [&] {
        const double u = rng.uniform01();
        return static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    };

    for (std::uint64_t t = 0; t < config.steps; ++t) {
        const std::size_t r = std::min(draw_row(), included.size() - 1);
        const int i0 = chi2_winner(s, rows[r], masses, 0);
        apply_update(s, rows[r], config.gain_at(s.time), config.lambda, i0);
        ++s.time;
    }

    for (std::size_t r = 0; r < included.size(); ++r) {
        const int t = included[r];
        map.entries.push_back({burt.labels[static_cast<std::size_t>(t)],
                               "q" + std::to_string(burt.question_of[static_cast<std::size_t>(t)]),
                               chi2_winner(s, rows[r], masses, 0)});
    }
    map.final_state = std::move(s);
    return map;
}

}  // namespace somlab
