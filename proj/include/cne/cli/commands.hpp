#ifndef CNE_CLI_COMMANDS_HPP
#define CNE_CLI_COMMANDS_HPP

#include "config.hpp"
#include "../metrics.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

/**
 * @file commands.hpp
 *
 * @brief Subcommands of the `cne` tool: gen, embed, bench, gradcheck, plot.
 */

namespace cne::cli {

enum ExitCode : int { exit_ok = 0, exit_usage = 2, exit_runtime = 3 };

/// Largest acceptable gradient-check error.
inline constexpr double gradcheck_threshold = 1e-4;

/**
 * Write `id,z1..zd[,label]` rows with lossless real formatting.
 */
void write_embedding_csv(const Dataset<double>& data, const Matrix<double>& coords, std::ostream& out);

/// Keys: knn_recall, knn_accuracy, silhouette (null when unavailable), k_recall, k_accuracy.
std::string quality_json(const QualityReport& q);

/// One JSON object per line with keys epoch, mean_loss, wall_ms, w_u.
void write_training_log(const TrainingLog& log, std::ostream& out);

struct EmbedResult {
    QualityReport quality;
    TrainingLog log;
};

/**
 * @brief Train one embedding and write every output into `config.out`.
 *
 * Writes embedding.csv, training_log.jsonl, config.ini, quality.json,
 * plot.svg (if `config.plot`) and encoder.bin (parametric mode).
 *
 * @throws UsageError for configuration problems found before training,
 * e.g. a supervised loss on unlabeled data.
 */
EmbedResult run_embed(RunConfig config);

struct BenchRow {
    LossKind loss;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    QualityReport quality;
    double final_loss = 0;
    double wall_ms = 0;
};

struct BenchOptions {
    RunConfig base;
    std::vector<LossKind> losses;
    std::vector<std::uint64_t> seeds;
    unsigned jobs = 1;
};

/**
 * @brief Run every (loss, seed) combination, each into `<out>/<loss>-seed<seed>/`.
 *
 * Up to `jobs` runs execute concurrently. A failing run is recorded in its
 * row and does not stop the others. Rows come back in grid order: losses
 * outer, seeds inner.
 *
 * @throws UsageError on an empty grid.
 */
std::vector<BenchRow> run_bench(const BenchOptions& options);

/**
 * Write bench.csv and bench.json into `dir`. Every row carries the mean and
 * sample standard deviation of each quality measure over the successful
 * runs of its loss.
 */
void write_bench_tables(const std::vector<BenchRow>& rows, const std::string& dir);

struct GradcheckCase {
    std::string variant;
    LossSpec<double> spec;
};

/**
 * The default spec for `kind` plus one case per variant flag that changes
 * the loss: log_ratio (trimap, tscne), paper_as_written (pacmap, trimap,
 * tscne) and denominator_includes_positive (temperature losses).
 */
std::vector<GradcheckCase> gradcheck_cases(LossKind kind, Index m = 5);

/**
 * @brief Random data, graph, batch and coordinates for finite-difference checks.
 *
 * `n` samples in 5 dimensions, 3 round-robin classes, a 5-neighbor graph,
 * 16 anchors and standard normal coordinates in `dim` dimensions.
 */
struct CheckProblem {
    Dataset<double> data;
    PairBatch batch;
    Matrix<double> coords;
};

CheckProblem make_check_problem(const LossSpec<double>& spec, Index n, Index dim, std::uint64_t seed);

struct GradcheckOptions {
    std::vector<LossKind> losses;
    int batches = 20;
    Index n = 64;
    Index dim = 2;
    Index m = 5;
    std::uint64_t seed = 0;
    double eps = 1e-6;
    /// Scale applied to the analytic gradient; anything but 1 is a deliberate corruption.
    double corrupt = 1;
};

struct GradcheckRow {
    std::string loss;
    std::string variant;
    double max_error = 0;
    bool pass = false;
};

std::vector<GradcheckRow> run_gradcheck(const GradcheckOptions& options);

/**
 * Parse the command line and run the selected subcommand.
 *
 * @return 0 on success, 2 on usage errors, 3 on runtime failures.
 */
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}

#endif
