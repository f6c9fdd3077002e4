// kmc command-line interface: validation, exact solving, sampling, cell
// geometry, and the Monte Carlo experiments, all reproducible per seed.
//
// Exit codes: 0 ok, 2 invalid input, 3 budget/guardrail exceeded.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kmc/experiments.hpp"
#include "kmc/io.hpp"
#include "kmc/sampling.hpp"
#include "kmc/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitGuardrail = 3;

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        grid.push_back(std::stod(item));
    }
    if (grid.empty()) throw std::invalid_argument("empty n-grid");
    return grid;
}

struct CommonFlags {
    int k = 1;
    std::uint64_t seed = 0;
    int trials = 100;
    std::string out;
    std::string format = "json";
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_trials = true) {
    cmd->add_option("--k", f.k, "chain order k");
    cmd->add_option("--seed", f.seed, "base seed");
    if (with_trials) cmd->add_option("--trials", f.trials, "number of Monte Carlo trials");
    cmd->add_option("--out", f.out, "output path (default: stdout)");
    cmd->add_option("--format", f.format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--threads", f.threads, "worker threads (0 = hardware)");
}

std::string emit_trials_or_report(const std::string& format,
                                  const std::vector<kmc::TrialRecord>& recs,
                                  const kmc::Json& report) {
    if (format == "csv") return kmc::trials_to_csv(recs);
    return report.dump(2);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-monotone chain toolkit"};
    app.require_subcommand(1);

    // --- validate -----------------------------------------------------------
    auto* validate_cmd = app.add_subcommand("validate", "validate a boundary chain file");
    std::string validate_points;
    CommonFlags vf;
    double va = 0.0, vb = 1.0;
    bool exhaustive = false, exact = false;
    validate_cmd->add_option("--points", validate_points, "chain JSON or x,y CSV")->required();
    validate_cmd->add_option("--k", vf.k, "chain order (CSV input)");
    validate_cmd->add_option("--a", va, "left endpoint (CSV input)");
    validate_cmd->add_option("--b", vb, "right endpoint (CSV input)");
    validate_cmd->add_option("--out", vf.out, "output path");
    validate_cmd->add_flag("--exhaustive", exhaustive, "use the exhaustive validator");
    validate_cmd->add_flag("--exact", exact, "exact rational predicates only");

    // --- solve --------------------------------------------------------------
    auto* solve_cmd = app.add_subcommand("solve", "longest valid chain");
    std::string solve_points, method = "dp";
    CommonFlags sf;
    double sa = 0.0, sb = 1.0;
    long long budget = kmc::kDefaultStateBudget;
    solve_cmd->add_option("--points", solve_points, "points file (JSON or CSV)")->required();
    solve_cmd->add_option("--k", sf.k, "chain order k");
    solve_cmd->add_option("--a", sa, "left endpoint");
    solve_cmd->add_option("--b", sb, "right endpoint");
    solve_cmd->add_option("--method", method, "dp | brute | lis | greedy")
        ->check(CLI::IsMember({"dp", "brute", "lis", "greedy"}));
    solve_cmd->add_option("--budget", budget, "dp transition budget");
    solve_cmd->add_option("--out", sf.out, "output path");

    // --- sample -------------------------------------------------------------
    auto* sample_cmd = app.add_subcommand("sample", "emit sampled points as CSV");
    CommonFlags mf;
    std::string mode = "square";
    double ma = 0.0, mb = 1.0;
    long long count = 100;
    sample_cmd->add_option("--mode", mode, "square | cell | poisson")
        ->check(CLI::IsMember({"square", "cell", "poisson"}));
    sample_cmd->add_option("--k", mf.k, "cell order");
    sample_cmd->add_option("--a", ma, "cell left endpoint");
    sample_cmd->add_option("--b", mb, "cell right endpoint");
    sample_cmd->add_option("--count", count, "points to draw (square/cell modes)");
    sample_cmd->add_option("--seed", mf.seed, "base seed");
    sample_cmd->add_option("--out", mf.out, "CSV path; sidecar written to <out>.json");

    // --- cell-info ----------------------------------------------------------
    auto* cell_cmd = app.add_subcommand("cell-info", "cell geometry as JSON");
    CommonFlags cf;
    double ca = 0.0, cb = 1.0;
    cell_cmd->add_option("--k", cf.k, "cell order");
    cell_cmd->add_option("--a", ca, "left endpoint");
    cell_cmd->add_option("--b", cb, "right endpoint");
    cell_cmd->add_option("--out", cf.out, "output path");

    // --- estimate -----------------------------------------------------------
    auto* est_cmd = app.add_subcommand("estimate", "growth-law estimation");
    CommonFlags ef;
    std::string est_model = "uniform", est_grid = "1000,3162,10000,31623";
    add_common(est_cmd, ef);
    est_cmd->add_option("--model", est_model, "uniform | poisson")
        ->check(CLI::IsMember({"uniform", "poisson"}));
    est_cmd->add_option("--n-grid", est_grid, "comma-separated ascending n values");

    // --- concentration ------------------------------------------------------
    auto* conc_cmd = app.add_subcommand("concentration", "fluctuation scale probe");
    CommonFlags kf;
    long long conc_n = 10000;
    add_common(conc_cmd, kf);
    conc_cmd->add_option("--n", conc_n, "sample size");

    // --- coupling -----------------------------------------------------------
    auto* coup_cmd = app.add_subcommand("coupling", "Poisson vs binomial count check");
    CommonFlags pf;
    long long coup_n = 100;
    add_common(coup_cmd, pf);
    coup_cmd->add_option("--n", coup_n, "interval width n (draws n^(k+1) points)");

    // --- limit-shape --------------------------------------------------------
    auto* shape_cmd = app.add_subcommand("limit-shape", "witness distance to the curve");
    CommonFlags lf;
    std::string shape_grid = "100,1000,10000";
    add_common(shape_cmd, lf);
    shape_cmd->add_option("--n-grid", shape_grid, "comma-separated ascending n values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalidInput;
    }

    try {
        const kmc::PredicateMode pmode =
            exact ? kmc::PredicateMode::exact : kmc::PredicateMode::hybrid;

        if (validate_cmd->parsed()) {
            kmc::BoundaryChain chain;
            if (validate_points.size() >= 5 &&
                validate_points.substr(validate_points.size() - 5) == ".json") {
                std::ifstream in(validate_points);
                if (!in) throw std::invalid_argument("cannot open " + validate_points);
                kmc::Json j;
                in >> j;
                chain = kmc::chain_from_json(j);
            } else {
                std::ifstream in(validate_points);
                if (!in) throw std::invalid_argument("cannot open " + validate_points);
                chain = kmc::BoundaryChain{vf.k, va, vb, kmc::Chain{kmc::points_from_csv(in)}};
            }
            const auto report = exhaustive ? kmc::validate_exhaustive(chain, pmode)
                                           : kmc::validate_windows(chain, pmode);
            write_output(kmc::validation_to_json(report).dump(2), vf.out);
            return kExitOk;
        }

        if (solve_cmd->parsed()) {
            auto pts = kmc::read_points_file(solve_points);
            kmc::SolveResult result;
            if (method == "dp") {
                result = kmc::solve_dp(std::move(pts), sf.k, sa, sb, budget);
            } else if (method == "brute") {
                result = kmc::solve_brute(std::move(pts), sf.k, sa, sb);
            } else if (method == "lis") {
                result = kmc::solve_lis(std::move(pts), sa, sb);
            } else {
                const kmc::Cell cell(sf.k, sa, sb);
                kmc::PoissonSample sample{cell, std::move(pts), kmc::area(cell)};
                result = kmc::solve_greedy_cells(sample);
            }
            write_output(kmc::solve_result_to_json(result).dump(2), sf.out);
            return kExitOk;
        }

        if (sample_cmd->parsed()) {
            std::vector<kmc::Point> pts;
            const kmc::RngSpec spec{mf.seed, 0};
            if (mode == "square") {
                if (count < 0) throw std::invalid_argument("count must be >= 0");
                pts = kmc::sample_uniform_square(static_cast<std::size_t>(count), spec);
            } else if (mode == "cell") {
                if (count < 0) throw std::invalid_argument("count must be >= 0");
                pts = kmc::sample_uniform_cell(kmc::Cell(mf.k, ma, mb),
                                               static_cast<std::size_t>(count), spec);
            } else {
                pts = kmc::sample_poisson_cell(kmc::Cell(mf.k, ma, mb), spec).points;
            }
            const kmc::Json sidecar{{"k", mf.k},          {"a", ma},
                                    {"b", mb},            {"mode", mode},
                                    {"seed", mf.seed},    {"count", pts.size()}};
            write_output(kmc::points_to_csv(pts), mf.out);
            if (!mf.out.empty()) {
                std::ofstream side(mf.out + ".json");
                side << sidecar.dump(2) << "\n";
            } else {
                std::cerr << sidecar.dump(2) << "\n";
            }
            return kExitOk;
        }

        if (cell_cmd->parsed()) {
            write_output(kmc::cell_info_to_json(kmc::Cell(cf.k, ca, cb)).dump(2), cf.out);
            return kExitOk;
        }

        if (est_cmd->parsed()) {
            kmc::TrialOptions opts;
            opts.threads = ef.threads;
            const auto grid = parse_grid(est_grid);
            const auto model =
                est_model == "uniform" ? kmc::Model::uniform : kmc::Model::poisson;
            if (ef.format == "csv") {
                // per-trial records only; the aggregate report is the json view
                std::vector<kmc::TrialRecord> recs;
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    kmc::TrialOptions per = opts;
                    per.stream_offset = (static_cast<std::uint64_t>(i + 1) << 32);
                    auto batch =
                        model == kmc::Model::uniform
                            ? kmc::run_uniform_trials(
                                  ef.k, static_cast<long long>(std::llround(grid[i])),
                                  ef.trials, ef.seed, per)
                            : kmc::run_poisson_trials(ef.k, grid[i], ef.trials, ef.seed, per);
                    recs.insert(recs.end(), batch.begin(), batch.end());
                }
                write_output(kmc::trials_to_csv(recs), ef.out);
            } else {
                const auto report =
                    kmc::estimate_alpha(ef.k, grid, ef.trials, ef.seed, model, opts);
                write_output(kmc::report_to_json(report).dump(2), ef.out);
            }
            return kExitOk;
        }

        if (conc_cmd->parsed()) {
            kmc::TrialOptions opts;
            opts.threads = kf.threads;
            if (kf.format == "csv") {
                const auto recs =
                    kmc::run_uniform_trials(kf.k, conc_n, kf.trials, kf.seed, opts);
                write_output(kmc::trials_to_csv(recs), kf.out);
            } else {
                const auto report =
                    kmc::concentration_experiment(kf.k, conc_n, kf.trials, kf.seed, opts);
                write_output(kmc::report_to_json(report).dump(2), kf.out);
            }
            return kExitOk;
        }

        if (coup_cmd->parsed()) {
            kmc::TrialOptions opts;
            opts.threads = pf.threads;
            const auto report = kmc::coupling_check(pf.k, coup_n, pf.trials, pf.seed, opts);
            write_output(kmc::coupling_to_json(report).dump(2), pf.out);
            return kExitOk;
        }

        if (shape_cmd->parsed()) {
            kmc::TrialOptions opts;
            opts.threads = lf.threads;
            std::vector<long long> grid;
            for (double g : parse_grid(shape_grid)) grid.push_back(std::llround(g));
            const auto report =
                kmc::limit_shape_probe(lf.k, grid, lf.trials, lf.seed, opts);
            write_output(kmc::report_to_json(report).dump(2), lf.out);
            return kExitOk;
        }
    } catch (const kmc::BudgetExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGuardrail;
    } catch (const kmc::GuardrailError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGuardrail;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    return kExitOk;
}
