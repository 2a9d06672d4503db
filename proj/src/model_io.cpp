#include <fstream>
#include <sstream>

#include "surfpde/errors.hpp"
#include "surfpde/io.hpp"

namespace surfpde {
namespace {

constexpr const char* kMagic = "surfpde-model 1";

std::string channel_token(const Channel& ch) {
    switch (ch.kind) {
        case ChannelKind::u: return "u";
        case ChannelKind::grad: return "grad:" + std::to_string(ch.component + 1);
        case ChannelKind::laplacian: return "laplacian";
        case ChannelKind::grad_laplacian: return "grad_laplacian:" + std::to_string(ch.component + 1);
        case ChannelKind::bilaplacian: return "bilaplacian";
        case ChannelKind::p_laplacian: return "p_laplacian:" + format_double(ch.p);
    }
    return "?";
}

[[noreturn]] void bad(const std::string& source, int line, const std::string& what) {
    fail(ErrorKind::parse, source + ":" + std::to_string(line) + ": " + what);
}

Channel parse_channel(const std::string& tok, const std::string& source, int line) {
    const auto colon = tok.find(':');
    const std::string head = tok.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : tok.substr(colon + 1);
    Channel ch;
    try {
        if (head == "u" && arg.empty()) {
            ch.kind = ChannelKind::u;
        } else if (head == "laplacian" && arg.empty()) {
            ch.kind = ChannelKind::laplacian;
        } else if (head == "bilaplacian" && arg.empty()) {
            ch.kind = ChannelKind::bilaplacian;
        } else if (head == "grad" && !arg.empty()) {
            ch.kind = ChannelKind::grad;
            ch.component = std::stoi(arg) - 1;
        } else if (head == "grad_laplacian" && !arg.empty()) {
            ch.kind = ChannelKind::grad_laplacian;
            ch.component = std::stoi(arg) - 1;
        } else if (head == "p_laplacian" && !arg.empty()) {
            ch.kind = ChannelKind::p_laplacian;
            ch.p = std::stod(arg);
        } else {
            bad(source, line, "unknown channel '" + tok + "'");
        }
    } catch (const std::logic_error&) {
        bad(source, line, "malformed channel '" + tok + "'");
    }
    if (ch.component < 0 || ch.component > 2) bad(source, line, "channel component out of range in '" + tok + "'");
    return ch;
}

RegressionMethod method_from_string(const std::string& name, const std::string& source, int line) {
    for (RegressionMethod m : {RegressionMethod::lasso_cd, RegressionMethod::qp, RegressionMethod::sqrt_lasso,
                               RegressionMethod::least_squares}) {
        if (to_string(m) == name) return m;
    }
    bad(source, line, "unknown regression method '" + name + "'");
}

double read_number(std::istringstream& ss, const std::string& source, int line) {
    std::string tok;
    if (!(ss >> tok)) bad(source, line, "missing number");
    try {
        size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::logic_error&) {
        bad(source, line, "malformed number '" + tok + "'");
    }
}

}  // namespace

void write_model(std::ostream& out, const SparseModel& model) {
    out << kMagic << '\n';
    out << "kind " << to_string(model.kind) << '\n';
    out << "map";
    for (const auto& ch : model.map.channels) out << ' ' << channel_token(ch);
    out << '\n';
    out << "ell " << model.ell << '\n';
    out << "p_values";
    for (double p : model.p_values) out << ' ' << format_double(p);
    out << '\n';
    out << "method " << to_string(model.method) << '\n';
    out << "mu " << format_double(model.mu) << '\n';
    out << "prune_rel_tol " << format_double(model.prune_rel_tol) << '\n';
    out << "tol " << format_double(model.tol) << '\n';
    const auto& d = model.diagnostics;
    out << "diag kkt_residual " << format_double(d.kkt_residual) << '\n';
    out << "diag jitter " << format_double(d.jitter) << '\n';
    out << "diag rcond " << format_double(d.rcond) << '\n';
    out << "diag interpolation_residual " << format_double(d.interpolation_residual) << '\n';
    out << "diag runtime_seconds " << format_double(d.runtime_seconds) << '\n';
    out << "diag seed " << d.seed << '\n';
    out << "diag rows " << d.rows << '\n';
    out << "diag iterations " << d.iterations << '\n';
    for (size_t j = 0; j < model.terms.size(); ++j) {
        const auto& t = model.terms[j];
        out << "term ";
        for (size_t c = 0; c < t.alpha.size(); ++c) out << (c ? "," : "") << t.alpha[c];
        out << ' ' << format_double(model.coefficients[static_cast<Eigen::Index>(j)]) << ' ' << t.label << '\n';
    }
    for (const auto& s : model.sources) {
        out << "source " << s.node << ' ' << format_double(s.amplitude);
        for (Eigen::Index k = 0; k < s.location.size(); ++k) out << ' ' << format_double(s.location[k]);
        out << '\n';
    }
    if (model.kind == ModelKind::eikonal) {
        out << "source_mu " << format_double(model.source_mu) << '\n';
        out << "source_sigma2 " << format_double(model.source_sigma2) << '\n';
    }
}

void write_model(const std::string& path, const SparseModel& model) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::parse, "cannot open '" + path + "' for writing");
    write_model(out, model);
}

SparseModel read_model(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line) || line != kMagic) bad(source, 1, "not a model file");
    SparseModel model;
    std::vector<double> coefs;
    bool have_kind = false, have_map = false;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "kind") {
            std::string name;
            ss >> name;
            try {
                model.kind = model_kind_from_string(name);
            } catch (const Error&) {
                bad(source, lineno, "unknown model kind '" + name + "'");
            }
            have_kind = true;
        } else if (key == "map") {
            std::string tok;
            while (ss >> tok) model.map.channels.push_back(parse_channel(tok, source, lineno));
            have_map = true;
        } else if (key == "ell") {
            model.ell = static_cast<int>(read_number(ss, source, lineno));
        } else if (key == "p_values") {
            std::string tok;
            while (ss >> tok) {
                std::istringstream one(tok);
                model.p_values.push_back(read_number(one, source, lineno));
            }
        } else if (key == "method") {
            std::string name;
            ss >> name;
            model.method = method_from_string(name, source, lineno);
        } else if (key == "mu") {
            model.mu = read_number(ss, source, lineno);
        } else if (key == "prune_rel_tol") {
            model.prune_rel_tol = read_number(ss, source, lineno);
        } else if (key == "tol") {
            model.tol = read_number(ss, source, lineno);
        } else if (key == "diag") {
            std::string name;
            ss >> name;
            const double v = read_number(ss, source, lineno);
            auto& d = model.diagnostics;
            if (name == "kkt_residual") d.kkt_residual = v;
            else if (name == "jitter") d.jitter = v;
            else if (name == "rcond") d.rcond = v;
            else if (name == "interpolation_residual") d.interpolation_residual = v;
            else if (name == "runtime_seconds") d.runtime_seconds = v;
            else if (name == "seed") d.seed = static_cast<std::uint64_t>(v);
            else if (name == "rows") d.rows = static_cast<Eigen::Index>(v);
            else if (name == "iterations") d.iterations = static_cast<int>(v);
            else bad(source, lineno, "unknown diagnostic '" + name + "'");
        } else if (key == "term") {
            if (!have_map) bad(source, lineno, "term before map");
            std::string alpha_text;
            ss >> alpha_text;
            FeatureTerm t;
            for (const auto& a : split_csv_line(alpha_text)) {
                try {
                    t.alpha.push_back(std::stoi(a));
                } catch (const std::logic_error&) {
                    bad(source, lineno, "malformed multi-index '" + alpha_text + "'");
                }
                if (t.alpha.back() < 0) bad(source, lineno, "negative exponent");
                t.degree += t.alpha.back();
            }
            if (static_cast<int>(t.alpha.size()) != model.map.dim()) {
                bad(source, lineno, "multi-index length does not match the map");
            }
            coefs.push_back(read_number(ss, source, lineno));
            t.label = term_label(model.map, t.alpha);
            model.terms.push_back(std::move(t));
        } else if (key == "source") {
            SourceTerm s;
            s.node = static_cast<int>(read_number(ss, source, lineno));
            s.amplitude = read_number(ss, source, lineno);
            std::vector<double> loc;
            std::string tok;
            while (ss >> tok) {
                std::istringstream one(tok);
                loc.push_back(read_number(one, source, lineno));
            }
            s.location = Eigen::Map<Vector>(loc.data(), static_cast<Eigen::Index>(loc.size()));
            model.sources.push_back(std::move(s));
        } else if (key == "source_mu") {
            model.source_mu = read_number(ss, source, lineno);
        } else if (key == "source_sigma2") {
            model.source_sigma2 = read_number(ss, source, lineno);
        } else {
            bad(source, lineno, "unknown key '" + key + "'");
        }
    }
    if (!have_kind || !have_map) bad(source, lineno, "model file lacks kind or map");
    if (model.terms.empty()) bad(source, lineno, "model file has no terms");
    try {
        model.map.validate();
    } catch (const Error& e) {
        bad(source, lineno, e.what());
    }
    model.coefficients = Eigen::Map<Vector>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
    model.raw_coefficients = model.coefficients;
    for (int j = 0; j < static_cast<int>(coefs.size()); ++j) {
        if (coefs[static_cast<size_t>(j)] != 0.0) model.support.push_back(j);
    }
    return model;
}

SparseModel read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::parse, "cannot open '" + path + "'");
    return read_model(in, path);
}

void write_coefficient_table(const std::string& path, const SparseModel& model) {
    std::vector<std::vector<std::string>> rows;
    for (size_t j = 0; j < model.terms.size(); ++j) {
        const double c = model.coefficients[static_cast<Eigen::Index>(j)];
        std::string label = model.terms[j].label;
        for (char& ch : label) {
            if (ch == ',') ch = ';';
        }
        rows.push_back({label, format_double(c), c != 0.0 ? "1" : "0"});
    }
    write_csv(path, {"label", "coefficient", "selected"}, rows);
}

}  // namespace surfpde
