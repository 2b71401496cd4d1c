// Command-line front end: stability queries, stability-map sweeps, Nyquist
// and Bode exports, parameter identification, and the full tracking
// experiment.
//
// Exit codes: 0 success (classify: analytically stable), 2 classify found
// the configuration unstable, 1 usage or runtime error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dyadstab/config.hpp"
#include "dyadstab/csv.hpp"
#include "dyadstab/dde.hpp"
#include "dyadstab/experiment.hpp"
#include "dyadstab/frequency.hpp"
#include "dyadstab/parallel.hpp"
#include "dyadstab/stability.hpp"
#include "dyadstab/svg.hpp"
#include "dyadstab/sysident.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnstable = 2;

struct CommonOptions {
    std::string config_path;
    std::optional<double> stiffness;
    std::optional<double> delay_ms;
    std::string output_dir;
};

dyadstab::ConfigDocument load_document(const CommonOptions& opts) {
    dyadstab::ConfigDocument doc = opts.config_path.empty()
                                       ? dyadstab::default_config()
                                       : dyadstab::load_config_file(opts.config_path);
    if (opts.stiffness) {
        if (!(*opts.stiffness > 0.0))
            throw dyadstab::ConfigError("/coupling/stiffness_Nm", "must be > 0");
        doc.stiffness = *opts.stiffness;
    }
    if (opts.delay_ms) {
        if (*opts.delay_ms < 0.0)
            throw dyadstab::ConfigError("/coupling/delay_ms", "must be >= 0");
        doc.delay = *opts.delay_ms / 1e3;
    }
    if (!opts.output_dir.empty()) doc.output.directory = opts.output_dir;
    if (const char* env = std::getenv("DYADSTAB_OUTPUT_DIR"); env && *env)
        doc.output.directory = env;
    return doc;
}

void add_common_options(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "JSON configuration file");
    cmd->add_option("--k", opts.stiffness, "override coupling stiffness (N/m)");
    cmd->add_option("--delay-ms", opts.delay_ms, "override one-way delay (ms)");
    cmd->add_option("-o,--output-dir", opts.output_dir, "output directory");
}

json verdict_to_json(const dyadstab::StabilityVerdict& verdict) {
    json out;
    out["kind"] = dyadstab::to_string(verdict.kind);
    out["critical_stiffness_Nm"] = verdict.critical_stiffness;
    if (verdict.max_delay) out["max_delay_ms"] = *verdict.max_delay * 1e3;
    if (verdict.crossing_frequency) out["crossing_frequency_rad_s"] = *verdict.crossing_frequency;
    return out;
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

int cmd_classify(const CommonOptions& opts, bool as_json) {
    const auto doc = load_document(opts);
    const auto config = doc.coupling();
    const auto result = dyadstab::classify(config);

    if (as_json) {
        json out;
        out["stiffness_Nm"] = config.stiffness;
        out["delay_ms"] = config.delay * 1e3;
        json axes;
        for (const auto& [axis, verdict] : result.per_axis)
            axes[axis] = verdict_to_json(verdict);
        out["per_axis"] = axes;
        out["aggregate"] = verdict_to_json(result.aggregate);
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout << "coupling: k = " << config.stiffness << " N/m, delay = "
                  << config.delay * 1e3 << " ms\n";
        std::cout << std::left << std::setw(10) << "axis" << "verdict\n";
        for (const auto& [axis, verdict] : result.per_axis)
            std::cout << std::left << std::setw(10) << axis << verdict.describe() << '\n';
        std::cout << std::left << std::setw(10) << "overall"
                  << result.aggregate.describe() << '\n';
    }
    return result.aggregate.kind == dyadstab::StabilityKind::Unstable ? kExitUnstable
                                                                      : kExitOk;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct RangeSpec {
    double lo = 0.0;
    double hi = 0.0;
};

RangeSpec parse_range(const std::string& text, const char* what) {
    RangeSpec range;
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError(std::string(what) + " must be in the form lo:hi");
    try {
        range.lo = std::stod(text.substr(0, colon));
        range.hi = std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw CLI::ValidationError(std::string(what) + ": not a numeric range");
    }
    if (!(range.hi > range.lo))
        throw CLI::ValidationError(std::string(what) + ": hi must exceed lo");
    return range;
}

int cmd_sweep(const CommonOptions& opts, const std::string& k_range_text,
              const std::string& delay_range_text, int cells, bool simulate, bool svg) {
    if (cells < 2) throw CLI::ValidationError("--cells must be >= 2");
    const auto doc = load_document(opts);
    const RangeSpec k_range = parse_range(k_range_text, "--k-range");
    const RangeSpec d_range = parse_range(delay_range_text, "--delay-range");
    if (!(k_range.lo > 0.0)) throw CLI::ValidationError("--k-range: stiffness must be > 0");
    if (d_range.lo < 0.0) throw CLI::ValidationError("--delay-range: delay must be >= 0");

    std::vector<double> stiffness(cells), delays(cells);
    for (int i = 0; i < cells; ++i) {
        const double f = static_cast<double>(i) / (cells - 1);
        stiffness[i] = k_range.lo + f * (k_range.hi - k_range.lo);
        delays[i] = (d_range.lo + f * (d_range.hi - d_range.lo)) / 1e3;  // ms -> s
    }

    struct Cell {
        dyadstab::StabilityKind analytic;
        std::optional<dyadstab::ResponseLabel> simulated;
    };
    std::vector<Cell> grid(static_cast<std::size_t>(cells) * cells);

    dyadstab::parallel_for(grid.size(), [&](std::size_t idx) {
        const int r = static_cast<int>(idx) / cells;
        const int c = static_cast<int>(idx) % cells;
        dyadstab::CouplingConfig config(doc.robot1, doc.robot2, stiffness[r],
                                        delays[c]);
        grid[idx].analytic = dyadstab::classify(config).aggregate.kind;
        if (simulate) {
            const double dt = dyadstab::default_dt(config.delay);
            const auto response = dyadstab::simulate_step_and_classify(
                config, doc.simulation.t_end, dt, doc.simulation.settle_window);
            auto worst = dyadstab::ResponseLabel::Stable;
            for (const auto& [axis, label] : response.classification) {
                (void)axis;
                if (static_cast<int>(label) > static_cast<int>(worst)) worst = label;
            }
            grid[idx].simulated = worst;
        }
    });

    std::ostringstream csv;
    csv << "stiffness_Nm,delay_ms,analytic" << (simulate ? ",simulated" : "") << "\n";
    std::vector<int> heat(grid.size());
    json verdicts = json::array();
    for (int r = 0; r < cells; ++r) {
        for (int c = 0; c < cells; ++c) {
            const Cell& cell = grid[static_cast<std::size_t>(r) * cells + c];
            csv << dyadstab::format_double(stiffness[r]) << ','
                << dyadstab::format_double(delays[c] * 1e3) << ','
                << dyadstab::to_string(cell.analytic);
            if (simulate) csv << ',' << dyadstab::to_string(*cell.simulated);
            csv << '\n';
            heat[static_cast<std::size_t>(r) * cells + c] =
                cell.analytic == dyadstab::StabilityKind::Unstable ? 2
                : cell.analytic == dyadstab::StabilityKind::DelayDependent ? 1 : 0;
            if (simulate) {
                verdicts.push_back({{"stiffness_Nm", stiffness[r]},
                                    {"delay_ms", delays[c] * 1e3},
                                    {"analytic", dyadstab::to_string(cell.analytic)},
                                    {"simulated", dyadstab::to_string(*cell.simulated)}});
            }
        }
    }

    const fs::path dir(doc.output.directory);
    dyadstab::atomic_write_file(dir / "stability_map.csv", csv.str());
    std::cout << "wrote " << (dir / "stability_map.csv").string() << '\n';
    if (simulate) {
        dyadstab::atomic_write_file(dir / "verdict_grid.json", verdicts.dump(2) + "\n");
        std::cout << "wrote " << (dir / "verdict_grid.json").string() << '\n';
    }
    if (svg) {
        std::vector<double> delays_ms;
        for (double d : delays) delays_ms.push_back(d * 1e3);
        dyadstab::atomic_write_file(
            dir / "stability_map.svg",
            dyadstab::render_heat_map(stiffness, delays_ms, heat,
                                      "stability map (analytic)"));
        std::cout << "wrote " << (dir / "stability_map.svg").string() << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// nyquist / bode
// ---------------------------------------------------------------------------

dyadstab::FrequencyGrid make_grid(double lo, double hi, int points) {
    if (points < 2) throw CLI::ValidationError("--points must be >= 2");
    return dyadstab::FrequencyGrid::logspace(lo, hi, static_cast<std::size_t>(points));
}

void write_nyquist_outputs(const dyadstab::CouplingConfig& config, const std::string& axis,
                           const dyadstab::FrequencyGrid& grid, const fs::path& dir,
                           const std::string& stem, bool svg) {
    const auto sweep = dyadstab::sweep_response(config, axis, grid);
    const auto scan = dyadstab::nyquist_encirclements(config, axis, grid);
    dyadstab::atomic_write_file(dir / (stem + ".csv"), dyadstab::frequency_sweep_csv(sweep));

    json meta;
    meta["axis"] = axis;
    meta["stiffness_Nm"] = config.stiffness;
    meta["delay_ms"] = config.delay * 1e3;
    meta["winding"] = scan.winding;
    meta["min_distance_to_minus_one"] = scan.min_distance;
    dyadstab::atomic_write_file(dir / (stem + ".json"), meta.dump(2) + "\n");

    if (svg) {
        dyadstab::SvgSeries curve;
        curve.label = "L(jω)";
        for (const auto& p : sweep) {
            curve.x.push_back(p.value.real());
            curve.y.push_back(p.value.imag());
        }
        dyadstab::SvgMarker critical{-1.0, 0.0, "#d62728", "(-1, 0)"};
        std::ostringstream title;
        title << "Nyquist, axis " << axis << ", k=" << config.stiffness
              << " N/m, delay=" << config.delay * 1e3 << " ms, winding=" << scan.winding;
        dyadstab::atomic_write_file(
            dir / (stem + ".svg"),
            dyadstab::render_line_plot({curve}, title.str(), "Re", "Im", {critical}));
    }
}

int cmd_nyquist(const CommonOptions& opts, const std::string& axis, double omega_lo,
                double omega_hi, int points, bool svg, bool batch) {
    const auto doc = load_document(opts);
    const auto grid = make_grid(omega_lo, omega_hi, points);
    const fs::path dir(doc.output.directory);

    if (!batch) {
        const auto config = doc.coupling();
        if (config.robot1.find(axis) == config.robot1.end())
            throw CLI::ValidationError("unknown axis '" + axis + "'");
        write_nyquist_outputs(config, axis, grid, dir, "nyquist_" + axis, svg);
        std::cout << "wrote " << (dir / ("nyquist_" + axis + ".csv")).string() << '\n';
        return kExitOk;
    }

    // 3x3 panel batch around the critical stiffness: k in {0.5, 1, 2} x K and
    // delay in {0.5, 1, 2} x D(2K), the reference frequency-domain picture.
    const auto& d1 = doc.robot1.at(axis);
    const auto& d2 = doc.robot2.at(axis);
    const double k_ref = dyadstab::critical_stiffness(d1, d2);
    const auto delay_ref = dyadstab::max_tolerable_delay(d1, d2, 2.0 * k_ref);
    int unstable_panels = 0;
    for (double km : {0.5, 1.0, 2.0}) {
        for (double dm : {0.5, 1.0, 2.0}) {
            dyadstab::CouplingConfig config(doc.robot1, doc.robot2, km * k_ref,
                                            dm * *delay_ref);
            std::ostringstream stem;
            stem << "nyquist_" << axis << "_k" << km << "_d" << dm;
            write_nyquist_outputs(config, axis, grid, dir, stem.str(), svg);
            const auto scan = dyadstab::nyquist_encirclements(config, axis, grid);
            if (scan.winding != 0) ++unstable_panels;
        }
    }
    std::cout << "wrote 9 Nyquist panels to " << dir.string() << " (" << unstable_panels
              << " unstable)\n";
    return kExitOk;
}

int cmd_bode(const CommonOptions& opts, const std::string& axis, double omega_lo,
             double omega_hi, int points, bool svg) {
    const auto doc = load_document(opts);
    const auto config = doc.coupling();
    if (config.robot1.find(axis) == config.robot1.end())
        throw CLI::ValidationError("unknown axis '" + axis + "'");
    const auto grid = make_grid(omega_lo, omega_hi, points);
    const auto sweep = dyadstab::sweep_response(config, axis, grid);

    const fs::path dir(doc.output.directory);
    dyadstab::atomic_write_file(dir / ("bode_" + axis + ".csv"),
                                dyadstab::frequency_sweep_csv(sweep));
    std::cout << "wrote " << (dir / ("bode_" + axis + ".csv")).string() << '\n';
    if (svg) {
        dyadstab::SvgSeries mag, phase;
        mag.label = "magnitude (dB)";
        phase.label = "phase (deg)";
        phase.color = "#ff7f0e";
        for (const auto& p : sweep) {
            const double lw = std::log10(p.omega);
            mag.x.push_back(lw);
            mag.y.push_back(p.magnitude_db);
            phase.x.push_back(lw);
            phase.y.push_back(p.phase_deg);
        }
        std::ostringstream title;
        title << "open loop, axis " << axis << ", k=" << config.stiffness
              << " N/m, delay=" << config.delay * 1e3 << " ms";
        dyadstab::atomic_write_file(
            dir / ("bode_" + axis + "_mag.svg"),
            dyadstab::render_line_plot({mag}, title.str(), "log10 omega (rad/s)", "dB"));
        dyadstab::atomic_write_file(
            dir / ("bode_" + axis + "_phase.svg"),
            dyadstab::render_line_plot({phase}, title.str(), "log10 omega (rad/s)", "deg"));
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const CommonOptions& opts) {
    const auto doc = load_document(opts);
    const auto config = doc.coupling();
    const double dt = std::min(doc.simulation.dt, dyadstab::default_dt(config.delay));
    const auto response = dyadstab::simulate_step_and_classify(
        config, doc.simulation.t_end, dt, doc.simulation.settle_window);

    const fs::path dir(doc.output.directory);
    dyadstab::atomic_write_file(dir / "response.csv", dyadstab::step_response_csv(response));

    json verdict;
    verdict["stiffness_Nm"] = config.stiffness;
    verdict["delay_ms"] = config.delay * 1e3;
    verdict["truncated"] = response.truncated;
    for (const auto& [axis, label] : response.classification) {
        verdict["axes"][axis] = {{"label", dyadstab::to_string(label)},
                                 {"growth_ratio", response.growth_ratio.at(axis)}};
    }
    dyadstab::atomic_write_file(dir / "response_verdict.json", verdict.dump(2) + "\n");

    std::cout << "wrote " << (dir / "response.csv").string() << " and "
              << (dir / "response_verdict.json").string() << '\n';
    for (const auto& [axis, label] : response.classification)
        std::cout << "axis " << axis << ": " << dyadstab::to_string(label)
                  << " (growth ratio " << response.growth_ratio.at(axis) << ")\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// identify
// ---------------------------------------------------------------------------

int cmd_identify(const std::string& input_csv, const std::vector<double>& synthetic,
                 std::uint64_t synthetic_seed, bool use_wls, const std::string& out_path,
                 const std::string& save_data_path) {
    dyadstab::TrajectoryRecord record;
    if (!input_csv.empty()) {
        record = dyadstab::load_trajectory_csv(input_csv);
    } else {
        if (synthetic.size() != 3)
            throw CLI::ValidationError("--synthetic needs M B NOISE (with --seed)");
        const dyadstab::AxisDynamics truth(synthetic[0], synthetic[1]);
        const auto profile = dyadstab::ExcitationProfile::reference();
        const auto kinematics = dyadstab::generate_excitation(profile, 20.0, 2e-3);
        record = dyadstab::simulate_measurement(truth, kinematics, synthetic[2],
                                                synthetic_seed);
    }
    if (!save_data_path.empty())
        dyadstab::atomic_write_file(save_data_path, dyadstab::trajectory_record_csv(record));

    const dyadstab::IdentificationResult result =
        use_wls ? dyadstab::estimate_wls(record) : dyadstab::estimate_ols(record);

    json out;
    out["method"] = use_wls ? "wls" : "ols";
    out["mass_kg"] = result.mass_hat;
    out["damping_Nspm"] = result.damping_hat;
    out["residual_rms_N"] = result.residual_rms;
    out["iterations"] = result.iterations;
    out["converged"] = result.converged;
    const std::string text = out.dump(2) + "\n";
    std::cout << text;
    if (!out_path.empty()) dyadstab::atomic_write_file(out_path, text);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

int cmd_experiment(const CommonOptions& opts, const std::string& grid_kind, int trials,
                   std::optional<std::uint64_t> seed) {
    if (trials < 1) throw CLI::ValidationError("--trials must be >= 1");
    auto doc = load_document(opts);
    if (seed) doc.experiment.seed = *seed;

    std::vector<dyadstab::ExperimentCondition> grid;
    if (grid_kind == "paper") {
        grid = dyadstab::paper_condition_grid(trials);
    } else if (grid_kind == "custom") {
        if (!doc.experiment.grid)
            throw CLI::ValidationError(
                "--grid custom requires /experiment/grid in the config file");
        grid.push_back(dyadstab::ExperimentCondition::unconnected(trials));
        for (double k : doc.experiment.grid->stiffness)
            for (double d : doc.experiment.grid->delays)
                grid.push_back(dyadstab::ExperimentCondition::connected(k, d, trials));
    } else {
        throw CLI::ValidationError("--grid must be 'paper' or 'custom'");
    }

    dyadstab::TrialOptions trial_options;
    trial_options.periods = doc.experiment.periods;
    const auto result =
        dyadstab::run_protocol(grid, doc.coupling(), doc.agents(), doc.target(),
                               doc.experiment.seed, trial_options);

    const fs::path dir(doc.output.directory);
    dyadstab::atomic_write_file(dir / "experiment_trials.csv", dyadstab::protocol_csv(result));

    json summary;
    summary["seed"] = doc.experiment.seed;
    summary["trials"] = trials;
    summary["baseline"] = result.summaries[result.baseline_index].label;
    json rows = json::array();
    for (const auto& row : result.summaries) {
        json r;
        r["condition"] = row.label;
        r["stiffness_Nm"] = row.stiffness;
        r["delay_ms"] = row.delay * 1e3;
        r["te1_mm"] = {{"mean", row.te1_mean * 1e3}, {"sd", row.te1_sd * 1e3}};
        r["te2_mm"] = {{"mean", row.te2_mean * 1e3}, {"sd", row.te2_sd * 1e3}};
        r["te1_vs_baseline"] = dyadstab::to_string(row.te1_mark);
        r["te2_vs_baseline"] = dyadstab::to_string(row.te2_mark);
        r["te1_p"] = row.te1_p;
        r["te2_p"] = row.te2_p;
        rows.push_back(r);
    }
    summary["conditions"] = rows;
    dyadstab::atomic_write_file(dir / "experiment_summary.json", summary.dump(2) + "\n");

    // Console table in the familiar layout.
    std::cout << std::left << std::setw(14) << "condition" << std::setw(22) << "TE1 (mm)"
              << "TE2 (mm)\n";
    for (const auto& row : result.summaries) {
        std::ostringstream te1, te2;
        te1 << std::fixed << std::setprecision(2) << row.te1_mean * 1e3 << " +/- "
            << row.te1_sd * 1e3 << " " << dyadstab::to_string(row.te1_mark);
        te2 << std::fixed << std::setprecision(2) << row.te2_mean * 1e3 << " +/- "
            << row.te2_sd * 1e3 << " " << dyadstab::to_string(row.te2_mark);
        std::cout << std::left << std::setw(14) << row.label << std::setw(22) << te1.str()
                  << te2.str() << '\n';
    }
    std::cout << "wrote " << (dir / "experiment_trials.csv").string() << " and "
              << (dir / "experiment_summary.json").string() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability analysis and simulation of delayed elastic dyads"};
    app.require_subcommand(1);

    // classify
    CommonOptions classify_opts;
    bool classify_json = false;
    auto* classify = app.add_subcommand(
        "classify", "analytic stability verdict for the configured coupling");
    add_common_options(classify, classify_opts);
    classify->add_flag("--json", classify_json, "emit JSON instead of a table");

    // sweep
    CommonOptions sweep_opts;
    std::string k_range = "10:150", delay_range = "0:400";
    int sweep_cells = 16;
    bool sweep_simulate = false, sweep_svg = false;
    auto* sweep = app.add_subcommand("sweep", "stability map over a (k, delay) grid");
    add_common_options(sweep, sweep_opts);
    sweep->add_option("--k-range", k_range, "stiffness range lo:hi (N/m)");
    sweep->add_option("--delay-range", delay_range, "delay range lo:hi (ms)");
    sweep->add_option("--cells", sweep_cells, "grid cells per dimension (>= 2)");
    sweep->add_flag("--simulate", sweep_simulate, "add time-domain verdicts");
    sweep->add_flag("--svg", sweep_svg, "emit an SVG heat map");

    // nyquist
    CommonOptions nyquist_opts;
    std::string nyquist_axis = "x";
    double omega_lo = 1e-2, omega_hi = 1e3;
    int points = 4096;
    bool nyquist_svg = false, nyquist_batch = false;
    auto* nyquist =
        app.add_subcommand("nyquist", "open-loop Nyquist data and encirclement count");
    add_common_options(nyquist, nyquist_opts);
    nyquist->add_option("--axis", nyquist_axis, "axis name");
    nyquist->add_option("--omega-min", omega_lo, "grid start (rad/s)");
    nyquist->add_option("--omega-max", omega_hi, "grid end (rad/s)");
    nyquist->add_option("--points", points, "grid points");
    nyquist->add_flag("--svg", nyquist_svg, "emit SVG plots");
    nyquist->add_flag("--batch", nyquist_batch,
                      "emit the 3x3 (k, delay) panel batch around the critical stiffness");

    // bode
    CommonOptions bode_opts;
    std::string bode_axis = "x";
    double bode_lo = 1e-2, bode_hi = 1e3;
    int bode_points = 4096;
    bool bode_svg = false;
    auto* bode = app.add_subcommand("bode", "magnitude/phase sweep of the open loop");
    add_common_options(bode, bode_opts);
    bode->add_option("--axis", bode_axis, "axis name");
    bode->add_option("--omega-min", bode_lo, "grid start (rad/s)");
    bode->add_option("--omega-max", bode_hi, "grid end (rad/s)");
    bode->add_option("--points", bode_points, "grid points");
    bode->add_flag("--svg", bode_svg, "emit SVG plots");

    // simulate
    CommonOptions simulate_opts;
    auto* simulate = app.add_subcommand(
        "simulate", "integrate the coupled response to opposing unit forces");
    add_common_options(simulate, simulate_opts);

    // identify
    std::string identify_input;
    std::vector<double> identify_synthetic;
    std::uint64_t identify_seed = 1;
    bool identify_wls = false;
    std::string identify_out;
    std::string identify_save;
    auto* identify =
        app.add_subcommand("identify", "estimate mass and damping from trajectory data");
    identify->add_option("--input", identify_input, "trajectory CSV (t,x,v,a,f)");
    identify->add_option("--synthetic", identify_synthetic,
                         "generate synthetic data: M B NOISE")
        ->expected(3);
    identify->add_option("--seed", identify_seed, "seed for synthetic noise");
    identify->add_flag("--wls", identify_wls, "use iteratively reweighted least squares");
    identify->add_option("--out", identify_out, "write the JSON result to this file");
    identify->add_option("--save-data", identify_save,
                         "also write the trajectory used as CSV (t,x,v,a,f)");

    // experiment
    CommonOptions experiment_opts;
    std::string experiment_grid = "paper";
    int experiment_trials = 20;
    std::optional<std::uint64_t> experiment_seed;
    auto* experiment =
        app.add_subcommand("experiment", "run the dyadic tracking protocol");
    add_common_options(experiment, experiment_opts);
    experiment->add_option("--grid", experiment_grid, "'paper' or 'custom'");
    experiment->add_option("--trials", experiment_trials, "trials per condition");
    experiment->add_option("--seed", experiment_seed, "base seed override");

    CLI11_PARSE(app, argc, argv);

    try {
        if (classify->parsed()) return cmd_classify(classify_opts, classify_json);
        if (sweep->parsed())
            return cmd_sweep(sweep_opts, k_range, delay_range, sweep_cells, sweep_simulate,
                             sweep_svg);
        if (nyquist->parsed())
            return cmd_nyquist(nyquist_opts, nyquist_axis, omega_lo, omega_hi, points,
                               nyquist_svg, nyquist_batch);
        if (bode->parsed())
            return cmd_bode(bode_opts, bode_axis, bode_lo, bode_hi, bode_points, bode_svg);
        if (simulate->parsed()) return cmd_simulate(simulate_opts);
        if (identify->parsed())
            return cmd_identify(identify_input, identify_synthetic, identify_seed,
                                identify_wls, identify_out, identify_save);
        if (experiment->parsed())
            return cmd_experiment(experiment_opts, experiment_grid, experiment_trials,
                                  experiment_seed);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    } catch (const dyadstab::ConfigError& e) {
        std::cerr << "config error at '" << e.path() << "': " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
