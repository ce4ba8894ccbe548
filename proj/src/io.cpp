#include "nepid/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace nepid {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& text, Index row) {
    const char* begin = text.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    while (end && (*end == ' ' || *end == '\r' || *end == '\t')) ++end;
    if (end == begin || (end && *end != '\0') || errno == ERANGE)
        throw Error(Errc::ParseError, "bad number '" + text + "' on data row " + std::to_string(row));
    return v;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json residuals_to_json(const ResidualReport& r) {
    json j{{"horizon", r.horizon},
           {"one_step_max", r.one_step_max},
           {"one_step_rel_max", r.one_step_rel_max},
           {"poly_residual_st", r.poly_residual_st},
           {"poly_residual_st1", r.poly_residual_st1}};
    j["unitarity_defect"] = r.unitarity_defect ? json(*r.unitarity_defect) : json(nullptr);
    return j;
}

ResidualReport residuals_from_json(const json& j) {
    ResidualReport r;
    r.horizon = j.at("horizon").get<Index>();
    r.one_step_max = j.at("one_step_max").get<double>();
    r.one_step_rel_max = j.at("one_step_rel_max").get<double>();
    r.poly_residual_st = j.at("poly_residual_st").get<double>();
    r.poly_residual_st1 = j.at("poly_residual_st1").get<double>();
    if (j.contains("unitarity_defect") && !j.at("unitarity_defect").is_null())
        r.unitarity_defect = j.at("unitarity_defect").get<double>();
    return r;
}

json real_vector_to_json(const RealVector& v) {
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

RealVector real_vector_from_json(const json& j) {
    RealVector v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

} // namespace

// ------------------------------------------------------------------ CSV ----

void write_trajectory_csv(std::ostream& os, const Matrix& X) {
    os << "t";
    for (Index i = 0; i < X.rows(); ++i) os << ",c" << i << "_re,c" << i << "_im";
    os << '\n';
    for (Index t = 0; t < X.cols(); ++t) {
        os << (t + 1);
        for (Index i = 0; i < X.rows(); ++i)
            os << ',' << format_double(X(i, t).real()) << ',' << format_double(X(i, t).imag());
        os << '\n';
    }
}

Matrix read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error(Errc::ParseError, "empty trajectory file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (header.empty() || header.front() != "t" || header.size() < 3 || (header.size() - 1) % 2 != 0)
        throw Error(Errc::ParseError, "trajectory header must be t,c0_re,c0_im,...");
    const Index n = static_cast<Index>((header.size() - 1) / 2);

    std::vector<std::vector<double>> rows;
    Index row = 0;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw Error(Errc::ParseError, "data row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                              " fields, expected " + std::to_string(header.size()));
        std::vector<double> values;
        values.reserve(cells.size() - 1);
        for (std::size_t c = 1; c < cells.size(); ++c) values.push_back(parse_double(cells[c], row));
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw Error(Errc::ParseError, "trajectory has no data rows");

    Matrix X(n, static_cast<Index>(rows.size()));
    for (Index t = 0; t < X.cols(); ++t)
        for (Index i = 0; i < n; ++i)
            X(i, t) = Complex(rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(2 * i)],
                              rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(2 * i + 1)]);
    if (!X.allFinite()) throw Error(Errc::ParseError, "trajectory contains non-finite values");
    return X;
}

// ----------------------------------------------------------------- meta ----

json meta_to_json(const TrajectoryMeta& meta) {
    json j{{"n", meta.n}, {"N", meta.N}, {"generator", meta.generator}, {"format_version", kFormatVersion}};
    j["dt"] = meta.dt ? json(*meta.dt) : json(nullptr);
    j["seed"] = meta.seed ? json(*meta.seed) : json(nullptr);
    if (meta.ground_truth) j["ground_truth_index"] = {{"s", meta.ground_truth->s}, {"T", meta.ground_truth->T}};
    return j;
}

TrajectoryMeta meta_from_json(const json& j) {
    TrajectoryMeta m;
    try {
        m.n = j.at("n").get<Index>();
        m.N = j.at("N").get<Index>();
        m.generator = j.value("generator", "");
        if (j.contains("dt") && !j.at("dt").is_null()) m.dt = j.at("dt").get<double>();
        if (j.contains("seed") && !j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("ground_truth_index")) {
            const auto& g = j.at("ground_truth_index");
            m.ground_truth = EpsIndex{g.at("s").get<Index>(), g.at("T").get<Index>(), 0.0};
        }
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("metadata: ") + e.what());
    }
    return m;
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".meta.json");
    return p;
}

// --------------------------------------------------------------- models ----

json matrix_to_json(const Matrix& M) {
    json rows = json::array();
    for (Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < M.cols(); ++j) row.push_back(json::array({M(i, j).real(), M(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw Error(Errc::ParseError, "matrix must be a non-empty array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j.front().size());
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Index>(row.size()) != cols) throw Error(Errc::ParseError, "ragged matrix rows");
        for (Index c = 0; c < cols; ++c) {
            const auto& e = row.at(static_cast<std::size_t>(c));
            if (!e.is_array() || e.size() != 2) throw Error(Errc::ParseError, "matrix entries must be [re, im] pairs");
            M(i, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
        }
    }
    return M;
}

json model_to_json(const Model& model) {
    const Index s = transient(model);
    const Index T = period(model);
    const PeriodicPoly p = PeriodicPoly::transient_period(s, T);
    json j{{"kind", kind_name(model)},
           {"n", state_dim(model)},
           {"s", s},
           {"T", T},
           {"poly", {{"a", p.a}, {"b", p.b}}},
           {"residuals", residuals_to_json(residuals(model))},
           {"format_version", kFormatVersion}};
    json mats;
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            j["params"] = {{"eps", m.params.eps}, {"delta", m.params.delta}};
            if constexpr (std::is_same_v<M, CmrModel>) {
                j["r"] = m.order();
                mats["U"] = matrix_to_json(m.U);
                mats["V"] = matrix_to_json(m.V);
                mats["Sdelta"] = real_vector_to_json(m.Sdelta);
            } else {
                j["r"] = m.rank();
                mats["W"] = matrix_to_json(m.W);
                mats["Aeta"] = matrix_to_json(m.Aeta);
                if constexpr (std::is_same_v<M, UcromModel>) {
                    mats["Ueta"] = matrix_to_json(m.Ueta);
                    j["nearness"] = m.nearness;
                }
            }
        },
        model);
    j["matrices"] = std::move(mats);
    return j;
}

Model model_from_json(const json& j) {
    try {
        if (j.at("format_version").get<int>() != kFormatVersion)
            throw Error(Errc::ParseError, "unsupported model format_version");
        const std::string kind = j.at("kind").get<std::string>();
        const Index s = j.at("s").get<Index>();
        const Index T = j.at("T").get<Index>();
        const FitParams params{j.at("params").at("eps").get<double>(), j.at("params").at("delta").get<double>()};
        const ResidualReport res = residuals_from_json(j.at("residuals"));
        const auto& mats = j.at("matrices");
        if (s < 0 || T < 1) throw Error(Errc::ParseError, "model has an invalid (s, T)");

        if (kind == "cmr") {
            CmrModel m;
            m.U = matrix_from_json(mats.at("U"));
            m.V = matrix_from_json(mats.at("V"));
            m.Sdelta = real_vector_from_json(mats.at("Sdelta"));
            m.s = s;
            m.T = T;
            m.params = params;
            m.residuals = res;
            const Index order = s + T;
            if (m.U.cols() != order || m.V.rows() != order || m.V.cols() != order || m.Sdelta.size() != order)
                throw Error(Errc::ParseError, "cmr model factors do not match s + T");
            return m;
        }
        Matrix W = matrix_from_json(mats.at("W"));
        Matrix Aeta = matrix_from_json(mats.at("Aeta"));
        if (Aeta.rows() != W.cols() || Aeta.cols() != W.cols())
            throw Error(Errc::ParseError, "reduced model matrices do not match rank r");
        if (kind == "crom") {
            CromModel m;
            m.W = std::move(W);
            m.Aeta = std::move(Aeta);
            m.s = s;
            m.T = T;
            m.params = params;
            m.residuals = res;
            return m;
        }
        if (kind == "ucrom") {
            UcromModel m;
            m.W = std::move(W);
            m.Aeta = std::move(Aeta);
            m.Ueta = matrix_from_json(mats.at("Ueta"));
            if (m.Ueta.rows() != m.Aeta.rows() || m.Ueta.cols() != m.Aeta.cols())
                throw Error(Errc::ParseError, "Ueta does not match rank r");
            m.s = s;
            m.T = T;
            m.params = params;
            m.nearness = j.at("nearness").get<double>();
            m.residuals = res;
            return m;
        }
        throw Error(Errc::ParseError, "unknown model kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("model: ") + e.what());
    }
}

// ---------------------------------------------------------------- files ----

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error(Errc::IoError, "cannot open " + tmp.string() + " for writing");
        os << contents;
        os.flush();
        if (!os) throw Error(Errc::IoError, "write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(Errc::IoError, "cannot move output into " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(Errc::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void save_trajectory(const std::filesystem::path& path, const Matrix& X) {
    std::ostringstream os;
    write_trajectory_csv(os, X);
    write_file_atomic(path, os.str());
}

Matrix load_trajectory(const std::filesystem::path& path) {
    std::istringstream is(read_file(path));
    return read_trajectory_csv(is);
}

void save_model(const std::filesystem::path& path, const Model& model) {
    write_file_atomic(path, model_to_json(model).dump(2) + "\n");
}

Model load_model(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("model file: ") + e.what());
    }
    return model_from_json(j);
}

void save_grid(const std::filesystem::path& path, const PseudospectrumGrid& grid) {
    std::ostringstream os;
    write_grid_csv(os, grid);
    write_file_atomic(path, os.str());
}

} // namespace nepid
