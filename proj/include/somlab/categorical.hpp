#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "somlab/som_engine.hpp"

namespace somlab {

// Cross-tabulation of two qualitative variables: p row modalities, q column
// modalities, integer counts.
struct ContingencyTable {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::int64_t> counts;  // p x q, row-major
    int p = 0;
    int q = 0;
    std::int64_t total = 0;

    static ContingencyTable from_counts(std::vector<std::int64_t> counts,
                                        std::vector<std::string> row_labels,
                                        std::vector<std::string> col_labels);
    // Integer matrix with row and column labels; header row required.
    static ContingencyTable from_csv(const std::string& path);

    std::int64_t at(int i, int j) const { return counts[static_cast<std::size_t>(i) * q + j]; }
    double f(int i, int j) const { return static_cast<double>(at(i, j)) / static_cast<double>(total); }
    double row_mass(int i) const;  // f_i.
    double col_mass(int j) const;  // f_.j
    Vec row_profile(int i) const;  // law of variable 2 given row i, length q
    Vec col_profile(int j) const;  // law of variable 1 given column j, length p
};

// Individuals x questions, answers as modality indices per question.
struct ResponseTable {
    std::vector<std::string> questions;
    std::vector<std::vector<std::string>> modality_labels;  // per question
    std::vector<std::vector<int>> answers;                  // N rows of K indices

    int n_questions() const { return static_cast<int>(questions.size()); }
    int n_individuals() const { return static_cast<int>(answers.size()); }

    // Header row carries the question names; cells are modality labels.
    static ResponseTable from_csv(const std::string& path);
};

// Burt table: M x M symmetric block matrix of all pairwise contingency
// tables, B = Z^T Z for the 0/1 indicator matrix Z.
struct BurtTable {
    int K = 0;
    std::vector<int> modalities_per_question;
    int M = 0;
    std::vector<std::int64_t> b;  // M x M
    std::vector<std::string> labels;
    std::vector<int> question_of;  // owning question per modality index
    std::int64_t individuals = 0;

    std::int64_t at(int s, int t) const { return b[static_cast<std::size_t>(s) * M + t]; }
    std::int64_t modality_count(int t) const { return at(t, t); }

    // Exact integer checks: symmetry, diagonal blocks diagonal with the
    // modality counts, off-block row sums equal to the diagonal counts.
    bool check_invariants() const;
};

BurtTable build_burt(const ResponseTable& responses);

// d^2(u, v) = sum_t (u_t - v_t)^2 / masses_t
double chi2_distance_sq(std::span<const double> u, std::span<const double> v,
                        std::span<const double> masses);
double chi2_distance(std::span<const double> u, std::span<const double> v,
                     std::span<const double> masses);

// The (p+q) x (q+p) data matrix: rows i < p are (r(i), c(j(i))) with j(i) the
// most probable column given i; rows p+j are (r(i(j)), c(j)). Argmax ties go
// to the lowest index.
std::vector<Vec> korresp_build_D(const ContingencyTable& table);

struct ModalityEntry {
    std::string label;
    std::string question;
    int unit = 0;
};

struct ModalityMap {
    LatticeSpec lattice;
    std::vector<ModalityEntry> entries;
    NetworkState final_state;
    std::vector<std::string> warnings;

    int unit_of(const std::string& label) const;
};

struct CategoricalConfig {
    LatticeSpec lattice = LatticeSpec::grid2d(7, 7);
    NeighborhoodFunction lambda = NeighborhoodFunction::step(1);
    GainSchedule schedule = GainSchedule::power(10.0, 100.0, 1.0);
    std::uint64_t steps = 20000;
    std::uint64_t seed = 1;
    // Organization phase: a constant gain for the first share of the steps,
    // then the decaying schedule. organize_fraction = 0 disables the phase.
    double organize_eps = 0.1;
    double organize_fraction = 0.5;
    // KORRESP winner: compare an input against its own profile block only
    // (default) or against the full concatenated vector.
    bool full_vector_winner = false;

    double gain_at(std::uint64_t t) const;
};

// SOM over the rows of D under the chi2 distance, alternating strictly
// between row inputs (even steps) and column inputs (odd steps).
ModalityMap korresp_run(const ContingencyTable& table, const CategoricalConfig& config);

// SOM over the normalized Burt rows, drawn with probability proportional to
// the modality count, chi2 distance against overall modality frequencies.
ModalityMap kacm_run(const BurtTable& burt, const CategoricalConfig& config);

}  // namespace somlab
