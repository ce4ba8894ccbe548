#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Eigenvalues>

#include "nepid/datagen.hpp"
#include "nepid/io.hpp"
#include "nepid/periodicity.hpp"
#include "nepid/predict.hpp"
#include "nepid/pspectra.hpp"
#include "nepid/realization.hpp"

namespace nepid::cli {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void require_distinct(const std::string& in, const std::string& out) {
    if (!in.empty() && !out.empty() && std::filesystem::path(in) == std::filesystem::path(out))
        throw Error(Errc::InvalidSpec, "input and output paths must differ");
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(Errc::InvalidSpec, std::string(name) + " must be > 0");
}

// ------------------------------------------------------------------ gen ----

struct GenArgs {
    std::string system = "nep";
    Index n = NepSpec{}.n;
    Index s = NepSpec{}.s;
    Index T = NepSpec{}.T;
    std::optional<Index> steps;
    double noise = 0.0;
    std::uint64_t seed = NepSpec{}.seed;
    Index nx = SchrodingerSpec{}.n_x;
    std::optional<double> dt;
    std::optional<Index> period;
    Index mode = 0;
    std::string out;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
    TrajectoryMeta meta;
    Matrix X;
    if (a.system == "nep") {
        NepSpec spec;
        spec.n = a.n;
        spec.s = a.s;
        spec.T = a.T;
        spec.N = a.steps.value_or(NepSpec{}.N);
        spec.noise = a.noise;
        spec.seed = a.seed;
        NepTrajectory gen = gen_nep(spec);
        X = std::move(gen.trajectory.data);
        meta.ground_truth = gen.truth;
        meta.seed = a.seed;
    } else {
        if (a.dt && a.period) throw Error(Errc::InvalidSpec, "--dt and --period are mutually exclusive");
        SchrodingerSpec spec;
        spec.n_x = a.nx;
        spec.steps = a.steps.value_or(SchrodingerSpec{}.steps);
        spec.mode = a.mode;
        if (a.dt) spec.dt = *a.dt;
        if (a.period) {
            spec.dt = schrodinger_period_dt(a.nx, a.mode, *a.period);
            meta.ground_truth = EpsIndex{0, *a.period, 0.0};
        }
        Trajectory traj = gen_schrodinger(spec);
        X = std::move(traj.data);
        meta.dt = traj.dt;
    }
    meta.n = X.rows();
    meta.N = X.cols();
    meta.generator = a.system;

    save_trajectory(a.out, X);
    const auto meta_path = meta_path_for(a.out);
    write_file_atomic(meta_path, meta_to_json(meta).dump(2) + "\n");
    out << "wrote " << a.out << " (" << X.rows() << " x " << X.cols() << ") and " << meta_path.string() << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- detect ----

struct DetectArgs {
    std::string in;
    double eps = 0.0;
    std::string method = "cov";
    std::string out;
};

DetectMethod parse_method(const std::string& m) { return m == "direct" ? DetectMethod::Direct : DetectMethod::Covariance; }

int cmd_detect(const DetectArgs& a, std::ostream& out) {
    require_positive(a.eps, "--eps");
    require_distinct(a.in, a.out);
    const Matrix X = load_trajectory(a.in);
    const EpsIndex idx = estimate_index(X, a.eps, parse_method(a.method));

    bool certified = false;
    try {
        certified = same_index(idx, estimate_index_direct(X, a.eps));
    } catch (const Error&) {
        certified = false;
    }
    const json report{{"s", idx.s},           {"T", idx.T},
                      {"eps", a.eps},         {"method", a.method},
                      {"certified", certified}, {"format_version", kFormatVersion}};
    const std::string text = report.dump(2) + "\n";
    if (!a.out.empty()) write_file_atomic(a.out, text);
    out << text;
    return kExitOk;
}

// ------------------------------------------------------------------ fit ----

struct FitArgs {
    std::string in;
    double eps = 0.0;
    double delta = 0.0;
    std::string method;
    std::string out;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
    require_positive(a.eps, "--eps");
    require_positive(a.delta, "--delta");
    require_distinct(a.in, a.out);
    const Matrix X = load_trajectory(a.in);
    const EpsIndex idx = estimate_index_cov(X, a.eps);

    Model model = [&]() -> Model {
        if (a.method == "cmr") return fit_cmr(X, idx, a.delta);
        if (a.method == "crom") return fit_crom(X, idx, a.delta);
        return fit_ucrom(X, idx, a.delta);
    }();
    save_model(a.out, model);

    const json j = model_to_json(model);
    json summary{{"kind", j.at("kind")},           {"s", idx.s},
                 {"T", idx.T},                     {"order", idx.order()},
                 {"r", j.at("r")},                 {"poly", j.at("poly")},
                 {"residuals", j.at("residuals")}, {"out", a.out}};
    if (j.contains("nearness")) summary["nearness"] = j.at("nearness");
    out << summary.dump(2) << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- predict ----

struct PredictArgs {
    std::string model;
    std::string init;
    Index init_column = 1;
    Index horizon = 0;
    std::string truth;
    std::string out;
    std::string errors_out;
    bool check_ep = false;
};

std::filesystem::path default_errors_path(const std::filesystem::path& out) {
    std::filesystem::path p = out;
    p.replace_extension(".errors.csv");
    return p;
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
    require_distinct(a.init, a.out);
    const Model model = load_model(a.model);
    const Matrix init = load_trajectory(a.init);
    if (a.init_column < 1 || a.init_column > init.cols())
        throw Error(Errc::InvalidSpec, "--init-column out of range for " + a.init);
    const Vector x1 = init.col(a.init_column - 1);

    std::optional<Matrix> truth;
    if (!a.truth.empty()) {
        const Matrix full = load_trajectory(a.truth);
        const Index offset = a.init_column - 1;
        if (full.cols() < offset + a.horizon)
            throw Error(Errc::ShapeMismatch, "truth has fewer than init-column + horizon - 1 columns");
        truth = full.middleCols(offset, a.horizon);
    }

    const PredictionRun run = run_prediction(model, x1, a.horizon, truth ? &*truth : nullptr);
    save_trajectory(a.out, run.predictions);
    out << "model: " << run.source << "\n";
    out << "horizon: " << run.horizon << "\n";
    out << "predictions: " << a.out << "\n";

    if (run.errors) {
        const std::filesystem::path err_path = a.errors_out.empty() ? default_errors_path(a.out) : std::filesystem::path(a.errors_out);
        std::ostringstream csv;
        csv << "t,rel_error\n";
        for (Index t = 0; t < run.errors->size(); ++t) csv << (t + 1) << ',' << fmt((*run.errors)(t)) << '\n';
        write_file_atomic(err_path, csv.str());
        out << "errors: " << err_path.string() << "\n";
        out << "max_rel_error: " << fmt(run.errors->maxCoeff()) << "\n";
    }

    if (a.check_ep) {
        const auto* cmr = std::get_if<CmrModel>(&model);
        if (cmr == nullptr) throw Error(Errc::InvalidSpec, "--check-ep needs a cmr model");
        const Matrix basis = cmr->basis();
        const Matrix rollout = simulate(model, basis.col(0), a.horizon);
        const Matrix ep = extrapolate_ep_series(basis, cmr->s, cmr->T, a.horizon);
        double dev = 0.0;
        for (Index t = 0; t < a.horizon; ++t) dev = std::max(dev, (rollout.col(t) - ep.col(t)).norm());
        out << "ep_check_max_deviation: " << fmt(dev) << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- pspec ----

struct PspecArgs {
    std::string model;
    std::optional<double> re_min, re_max, im_min, im_max;
    double pad = 0.5;
    Index resolution = 200;
    unsigned threads = 0;
    std::string out;
};

int cmd_pspec(const PspecArgs& a, std::ostream& out) {
    require_distinct(a.model, a.out);
    if (a.resolution < 2) throw Error(Errc::InvalidSpec, "--resolution must be >= 2");
    const Model model = load_model(a.model);
    const Matrix M = connecting_matrix(model);

    const Window box = default_window(M, 0.0);
    Window window;
    const int given = int(a.re_min.has_value()) + int(a.re_max.has_value()) + int(a.im_min.has_value()) +
                      int(a.im_max.has_value());
    if (given == 4) {
        window = Window{*a.re_min, *a.re_max, *a.im_min, *a.im_max};
    } else if (given == 0) {
        window = default_window(M, a.pad);
    } else {
        throw Error(Errc::InvalidSpec, "give all of --re-min --re-max --im-min --im-max or none");
    }

    const PseudospectrumGrid grid = pseudospectrum_grid(M, window, a.resolution, a.threads);
    save_grid(a.out, grid);
    out << "eigenvalue box: re [" << fmt(box.re_min) << ", " << fmt(box.re_max) << "], im [" << fmt(box.im_min)
        << ", " << fmt(box.im_max) << "]\n";
    out << "window: re [" << fmt(window.re_min) << ", " << fmt(window.re_max) << "], im [" << fmt(window.im_min)
        << ", " << fmt(window.im_max) << "]\n";
    out << "grid: " << a.resolution << " x " << a.resolution << " -> " << a.out << "\n";
    return kExitOk;
}

} // namespace

int exit_code_for(Errc code) {
    switch (code) {
    case Errc::InvalidInput:
    case Errc::InvalidSpec:
    case Errc::ShapeMismatch:
    case Errc::ParseError: return kExitUsage;
    case Errc::IoError: return kExitIo;
    case Errc::NotNearlyPeriodic: return kExitNotPeriodic;
    case Errc::NotNearUnitary: return kExitNotUnitary;
    case Errc::NumericalBlowup: return kExitBlowup;
    default: return kExitFailure;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Identify nearly eventually periodic dynamics from snapshot data", "nepid"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a synthetic trajectory CSV and its metadata sidecar");
    g->add_option("--system", gen.system, "nep or schrodinger")
        ->check(CLI::IsMember({"nep", "schrodinger"}))
        ->capture_default_str();
    g->add_option("--n", gen.n, "nep: state dimension")->capture_default_str();
    g->add_option("--s", gen.s, "nep: transient length")->capture_default_str();
    g->add_option("--T", gen.T, "nep: period")->capture_default_str();
    g->add_option("--steps", gen.steps, "number of snapshots (nep 40, schrodinger 300)");
    g->add_option("--noise", gen.noise, "nep: per-column noise amplitude")->capture_default_str();
    g->add_option("--seed", gen.seed, "nep: RNG seed")->capture_default_str();
    g->add_option("--nx", gen.nx, "schrodinger: interior grid points")->capture_default_str();
    g->add_option("--dt", gen.dt, "schrodinger: time step (default 0.01)");
    g->add_option("--period", gen.period, "schrodinger: choose dt so that the orbit has this period");
    g->add_option("--mode", gen.mode, "schrodinger: eigenmode of the initial state")->capture_default_str();
    g->add_option("--out", gen.out, "trajectory CSV path")->required();

    DetectArgs det;
    auto* d = app.add_subcommand("detect", "Estimate the sample index (s, T)");
    d->add_option("--in", det.in, "trajectory CSV")->required();
    d->add_option("--eps", det.eps, "tolerance")->required();
    d->add_option("--method", det.method, "cov or direct")
        ->check(CLI::IsMember({"cov", "direct"}))
        ->capture_default_str();
    d->add_option("--out", det.out, "optional JSON report path");

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "Fit a cyclic realization and write the model JSON");
    f->add_option("--in", fit.in, "trajectory CSV")->required();
    f->add_option("--eps", fit.eps, "detection tolerance")->required();
    f->add_option("--delta", fit.delta, "singular value perturbation / cutoff")->required();
    f->add_option("--method", fit.method, "cmr, crom or ucrom")
        ->check(CLI::IsMember({"cmr", "crom", "ucrom"}))
        ->required();
    f->add_option("--out", fit.out, "model JSON path")->required();

    PredictArgs pred;
    auto* p = app.add_subcommand("predict", "Roll a fitted model forward");
    p->add_option("--model", pred.model, "model JSON")->required();
    p->add_option("--init", pred.init, "trajectory CSV holding the initial state")->required();
    p->add_option("--init-column", pred.init_column, "1-based column of --init used as x_1")->capture_default_str();
    p->add_option("--horizon", pred.horizon, "number of predicted snapshots, x_1 included")
        ->required()
        ->check(CLI::PositiveNumber);
    p->add_option("--truth", pred.truth, "trajectory CSV to compare against, aligned with --init-column");
    p->add_option("--out", pred.out, "prediction CSV path")->required();
    p->add_option("--errors-out", pred.errors_out, "relative error CSV path (default: --out with extension .errors.csv)");
    p->add_flag("--check-ep", pred.check_ep, "cmr only: compare the rollout with the periodic extrapolation");

    PspecArgs ps;
    auto* s = app.add_subcommand("pspec", "Pseudospectrum grid of the fitted connecting matrix");
    s->add_option("--model", ps.model, "model JSON")->required();
    s->add_option("--re-min", ps.re_min);
    s->add_option("--re-max", ps.re_max);
    s->add_option("--im-min", ps.im_min);
    s->add_option("--im-max", ps.im_max);
    s->add_option("--pad", ps.pad, "padding of the default eigenvalue window")->capture_default_str();
    s->add_option("--resolution", ps.resolution, "grid points per axis")->capture_default_str();
    s->add_option("--threads", ps.threads, "worker threads (0: NEP_IDENT_THREADS or all cores)");
    s->add_option("--out", ps.out, "grid CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*g) return cmd_gen(gen, out);
        if (*d) return cmd_detect(det, out);
        if (*f) return cmd_fit(fit, out);
        if (*p) return cmd_predict(pred, out);
        return cmd_pspec(ps, out);
    } catch (const Error& e) {
        err << "error: " << e.what();
        if (e.step()) err << " (step " << *e.step() << ")";
        err << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

} // namespace nepid::cli
