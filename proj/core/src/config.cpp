#include "perfhom/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "perfhom/errors.hpp"

namespace perfhom {

const char* to_string(Command c) {
    switch (c) {
    case Command::cell: return "cell";
    case Command::permeability: return "permeability";
    case Command::simulate: return "simulate";
    case Command::darcy: return "darcy";
    case Command::sweep_small: return "sweep-small";
    case Command::sweep_large: return "sweep-large";
    case Command::poincare: return "poincare";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, int line) {
    double x = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw config_error("expected a number, got '" + v + "'", line);
    if (!std::isfinite(x)) throw config_error("non-finite number '" + v + "'", line);
    return x;
}

int to_int(const std::string& v, int line) {
    int x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw config_error("expected an integer, got '" + v + "'", line);
    return x;
}

bool to_bool(const std::string& v, int line) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw config_error("expected a boolean, got '" + v + "'", line);
}

std::vector<double> to_list(const std::string& v, int line) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(v);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw config_error("empty entry in list '" + v + "'", line);
        out.push_back(to_double(item, line));
    }
    if (out.empty()) throw config_error("empty list", line);
    return out;
}

// Keys collected from the file; every get marks its key used and finish()
// rejects leftovers, so misspelled keys fail loudly instead of silently
// keeping a default.
class KeyReader {
public:
    void insert(const std::string& key, const std::string& value, int line) {
        auto [it, fresh] = keys_.try_emplace(key, Entry{value, line, false});
        if (!fresh) throw config_error("duplicate key '" + key + "'", line);
        (void)it;
    }

    bool has(const std::string& key) {
        auto it = keys_.find(key);
        if (it == keys_.end()) return false;
        it->second.used = true;
        return true;
    }

    void get(const std::string& key, double& slot) {
        if (auto* e = find(key)) slot = to_double(e->value, e->line);
    }
    void get(const std::string& key, int& slot) {
        if (auto* e = find(key)) slot = to_int(e->value, e->line);
    }
    void get(const std::string& key, bool& slot) {
        if (auto* e = find(key)) slot = to_bool(e->value, e->line);
    }
    void get(const std::string& key, std::vector<double>& slot) {
        if (auto* e = find(key)) slot = to_list(e->value, e->line);
    }

    template <class Enum>
    void get_enum(const std::string& key, Enum& slot,
                  std::initializer_list<std::pair<const char*, Enum>> words) {
        auto* e = find(key);
        if (!e) return;
        for (const auto& [word, val] : words)
            if (e->value == word) {
                slot = val;
                return;
            }
        std::string expect;
        for (const auto& [word, val] : words) {
            (void)val;
            if (!expect.empty()) expect += "|";
            expect += word;
        }
        throw config_error("bad value '" + e->value + "' for " + key + " (expected " + expect + ")",
                           e->line);
    }

    void direction(const std::string& key, std::array<double, 3>& slot) {
        auto* e = find(key);
        if (!e) return;
        auto v = to_list(e->value, e->line);
        if (v.size() > 3)
            throw config_error(key + " takes at most 3 components", e->line);
        slot = {0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < v.size(); ++i) slot[i] = v[i];
    }

    void finish(const std::string& section) const {
        for (const auto& [key, e] : keys_)
            if (!e.used)
                throw config_error("unknown key '" + key + "' for [" + section + "]", e.line);
    }

private:
    struct Entry {
        std::string value;
        int line;
        bool used;
    };

    Entry* find(const std::string& key) {
        auto it = keys_.find(key);
        if (it == keys_.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    std::map<std::string, Entry> keys_;
};

void read_shape(KeyReader& r, CellShape& shape) {
    r.get_enum("shape", shape.kind,
               {{"ball", HoleShape::ball}, {"ellipsoid", HoleShape::ellipsoid}, {"box", HoleShape::box}});
    r.get("major_axis", shape.major_axis);
}

void read_forcing(KeyReader& r, ForcingSpec& f) {
    r.get_enum("forcing", f.kind,
               {{"zero", ForcingKind::zero},
                {"uniform", ForcingKind::uniform},
                {"rotational", ForcingKind::rotational}});
    r.get("forcing_amplitude", f.amplitude);
    r.direction("forcing_direction", f.direction);
    r.get("forcing_ramp_tau", f.ramp_tau);
}

void read_initial(KeyReader& r, InitialSpec& u0) {
    r.get_enum("initial", u0.kind,
               {{"zero", InitialKind::zero},
                {"uniform", InitialKind::uniform},
                {"vortex", InitialKind::vortex}});
    r.get("initial_amplitude", u0.amplitude);
    r.direction("initial_direction", u0.direction);
}

void read_flow(KeyReader& r, SweepFlow& flow) {
    r.get("t_end", flow.t_end);
    r.get("dt", flow.dt);
    r.get("viscosity", flow.viscosity);
    r.get("solver_tol", flow.solver_tol);
    r.get("compare_stride", flow.compare_stride);
    read_forcing(r, flow.forcing);
    read_initial(r, flow.initial);
}

void fill_cell(KeyReader& r, CellParams& p) {
    r.get("dim", p.dim);
    r.get("eta", p.eta);
    read_shape(r, p.shape);
    r.get("resolution", p.resolution);
    r.get("c", p.c);
    r.get("rel_tol", p.rel_tol);
    r.get("form_gap_tol", p.form_gap_tol);
    r.get("dump_fields", p.dump_fields);
}

void fill_permeability(KeyReader& r, PermeabilityParams& p) {
    r.get("dim", p.dim);
    read_shape(r, p.shape);
    r.get("resolution", p.resolution);
    r.get("etas", p.etas);
    r.get("rel_tol", p.rel_tol);
    r.get("form_gap_tol", p.form_gap_tol);
}

void fill_simulate(KeyReader& r, SimulateParams& p) {
    r.get("dim", p.dim);
    r.get("resolution", p.resolution);
    r.get("perforated", p.perforated);
    r.get("eps", p.eps);
    r.get("alpha", p.alpha);
    r.get("a_eps", p.a_eps);
    r.get("delta", p.delta);
    r.get("delta3", p.delta3);
    read_shape(r, p.shape);
    r.get("sigma2", p.sigma2);
    r.get("viscosity", p.viscosity);
    r.get("t_end", p.t_end);
    r.get("dt_max", p.dt_max);
    r.get("cfl", p.cfl);
    r.get("fixed_dt", p.fixed_dt);
    r.get("solver_tol", p.solver_tol);
    read_forcing(r, p.forcing);
    read_initial(r, p.initial);
    r.get("snapshot_stride", p.snapshot_stride);
    r.get("dump_fields", p.dump_fields);
}

void fill_darcy(KeyReader& r, DarcyParams& p, int section_line) {
    r.get("dim", p.dim);
    r.get("resolution", p.resolution);
    p.permeability = Tensor::zero(p.dim);
    const char* diag[3] = {"a11", "a22", "a33"};
    for (int i = 0; i < p.dim; ++i) {
        if (!r.has(diag[i]))
            throw config_error(std::string("darcy needs the diagonal entry ") + diag[i],
                               section_line);
        r.get(diag[i], p.permeability.m[i][i]);
    }
    auto off = [&](const char* key, int i, int j) {
        double v = 0.0;
        r.get(key, v);
        p.permeability.m[i][j] = p.permeability.m[j][i] = v;
    };
    off("a12", 0, 1);
    if (p.dim == 3) {
        off("a13", 0, 2);
        off("a23", 1, 2);
    }
    r.get("viscosity", p.viscosity);
    read_forcing(r, p.forcing);
    r.get("time", p.time);
    r.get("dump_fields", p.dump_fields);
}

void fill_sweep_small(KeyReader& r, SmallSweepConfig& p) {
    r.get("dim", p.dim);
    r.get("eps", p.eps);
    r.get("alphas", p.alphas);
    r.get("alpha", p.alpha);
    r.get("epsilons", p.epsilons);
    r.get("delta", p.delta);
    r.get("delta3", p.delta3);
    read_shape(r, p.shape);
    r.get("resolution", p.resolution);
    r.get("sigma2_override", p.sigma2_override);
    read_flow(r, p.flow);
}

void fill_sweep_large(KeyReader& r, LargeSweepConfig& p) {
    r.get("dim", p.dim);
    r.get("alpha", p.alpha);
    r.get("epsilons", p.epsilons);
    r.get("cells_per_period", p.cells_per_period);
    r.get("delta", p.delta);
    r.get("delta3", p.delta3);
    read_shape(r, p.shape);
    r.get("cell_resolution", p.cell_resolution);
    r.get("cell_etas", p.cell_etas);
    read_flow(r, p.flow);
}

void fill_poincare(KeyReader& r, PoincareParams& p) {
    r.get("perforated", p.perforated);
    r.get("dim", p.dim);
    r.get("alpha", p.alpha);
    r.get("delta", p.delta);
    r.get("delta3", p.delta3);
    read_shape(r, p.shape);
    r.get("epsilons", p.epsilons);
    r.get("cells_per_period", p.cells_per_period);
    r.get("resolution", p.resolution);
}

} // namespace

Config parse_config(const std::string& text) {
    Config cfg;
    KeyReader reader;
    bool have_section = false;
    int section_line = 0;
    std::string section;

    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        auto cut = raw.find_first_of("#;");
        std::string s = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw config_error("unterminated section header", line);
            if (have_section) throw config_error("more than one section", line);
            section = trim(s.substr(1, s.size() - 2));
            section_line = line;
            have_section = true;
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) throw config_error("expected key = value", line);
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw config_error("empty key", line);
        if (value.empty()) throw config_error("empty value for '" + key + "'", line);
        if (!have_section) throw config_error("key before the [command] section", line);
        reader.insert(key, value, line);
    }
    if (!have_section) throw config_error("missing [command] section", 0);

    if (section == "cell") {
        cfg.command = Command::cell;
        fill_cell(reader, cfg.cell);
    } else if (section == "permeability") {
        cfg.command = Command::permeability;
        fill_permeability(reader, cfg.permeability);
    } else if (section == "simulate") {
        cfg.command = Command::simulate;
        fill_simulate(reader, cfg.simulate);
    } else if (section == "darcy") {
        cfg.command = Command::darcy;
        fill_darcy(reader, cfg.darcy, section_line);
    } else if (section == "sweep-small") {
        cfg.command = Command::sweep_small;
        fill_sweep_small(reader, cfg.sweep_small);
    } else if (section == "sweep-large") {
        cfg.command = Command::sweep_large;
        fill_sweep_large(reader, cfg.sweep_large);
    } else if (section == "poincare") {
        cfg.command = Command::poincare;
        fill_poincare(reader, cfg.poincare);
    } else {
        throw config_error("unknown command '" + section + "'", section_line);
    }
    reader.finish(section);
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// Narrowest extent of the hole form: the inscribed ball of the
// circumscribed delta*a ball.
double hole_min_width(int dim, const CellShape& shape, double delta, double a) {
    return 2.0 * delta * a * shape.inner_ratio(dim);
}

void check_perforation(std::vector<std::string>& out, const std::string& where, int dim,
                       double eps, double alpha, double a_eps, double delta, double delta3,
                       const CellShape& shape, int resolution) {
    PerforationSpec spec;
    spec.dim = dim;
    spec.eps = eps;
    spec.alpha = alpha;
    spec.a_eps = a_eps;
    spec.delta = delta;
    spec.delta3 = delta3;
    spec.shape = shape;
    try {
        spec.validate();
    } catch (const std::exception& e) {
        out.push_back(where + ": " + e.what());
        return;
    }
    if (resolution <= 0) {
        out.push_back(where + ": resolution must be positive");
        return;
    }
    double h = 1.0 / resolution;
    double w = hole_min_width(dim, shape, delta, spec.resolved_a());
    if (w < h)
        out.push_back(where + ": holes narrower than one cell (width " + num(w) +
                      ", spacing " + num(h) + ") will vanish from the grid");
    else if (w < 2.0 * h)
        out.push_back(where + ": holes span fewer than two cells (width " + num(w) +
                      ", spacing " + num(h) + "), geometry will be rejected");
    double period_cells = eps * resolution;
    if (std::abs(period_cells - std::round(period_cells)) > 1e-9 * resolution)
        out.push_back(where + ": eps " + num(eps) +
                      " is not an integer number of cells at resolution " +
                      std::to_string(resolution));
}

void check_cell_margin(std::vector<std::string>& out, const std::string& where, double eta,
                       int resolution) {
    if (eta <= 0.0 || eta >= 1.0) {
        out.push_back(where + ": eta must lie in (0, 1)");
        return;
    }
    if (resolution <= 0) {
        out.push_back(where + ": resolution must be positive");
        return;
    }
    double h = 1.0 / resolution;
    if (eta > 1.0 - 4.0 * h)
        out.push_back(where + ": obstacle of size " + num(eta) +
                      " leaves less than a 2-cell margin to the cell boundary at resolution " +
                      std::to_string(resolution));
    if (eta < 2.0 * h)
        out.push_back(where + ": obstacle of size " + num(eta) +
                      " spans fewer than two cells at resolution " + std::to_string(resolution));
}

int sweep_row_resolution(double eps, int cells_per_period) {
    double r = cells_per_period / eps;
    if (std::abs(r - std::round(r)) > 1e-9 * r) return -1;
    return static_cast<int>(std::llround(r));
}

} // namespace

std::vector<std::string> validate_config(const Config& cfg) {
    std::vector<std::string> out;
    switch (cfg.command) {
    case Command::cell:
        check_cell_margin(out, "cell", cfg.cell.eta, cfg.cell.resolution);
        break;
    case Command::permeability: {
        const auto& p = cfg.permeability;
        if (p.etas.size() < 3)
            out.push_back("permeability: the vanishing-size fit needs at least 3 obstacle sizes");
        for (std::size_t i = 1; i < p.etas.size(); ++i)
            if (!(p.etas[i] < p.etas[i - 1])) {
                out.push_back("permeability: etas must decrease strictly");
                break;
            }
        for (double eta : p.etas)
            check_cell_margin(out, "permeability eta " + num(eta), eta, p.resolution);
        break;
    }
    case Command::simulate: {
        const auto& p = cfg.simulate;
        if (p.perforated)
            check_perforation(out, "simulate", p.dim, p.eps, p.alpha, p.a_eps, p.delta, p.delta3,
                              p.shape, p.resolution);
        else if (p.sigma2 <= 0.0)
            out.push_back("simulate: unperforated runs need an explicit sigma2");
        break;
    }
    case Command::darcy:
        if (!is_spd(cfg.darcy.permeability))
            out.push_back("darcy: the permeability tensor is not symmetric positive definite");
        break;
    case Command::sweep_small: {
        const auto& p = cfg.sweep_small;
        bool alpha_mode = !p.alphas.empty();
        bool eps_mode = !p.epsilons.empty();
        if (alpha_mode == eps_mode) {
            out.push_back("sweep-small: set exactly one of alphas or epsilons");
            break;
        }
        if (alpha_mode)
            for (double alpha : p.alphas)
                check_perforation(out, "sweep-small alpha " + num(alpha), p.dim, p.eps,
                                  alpha, 0.0, p.delta, p.delta3, p.shape, p.resolution);
        else
            for (double eps : p.epsilons)
                check_perforation(out, "sweep-small eps " + num(eps), p.dim, eps,
                                  p.alpha, 0.0, p.delta, p.delta3, p.shape, p.resolution);
        break;
    }
    case Command::sweep_large: {
        const auto& p = cfg.sweep_large;
        Regime reg = classify_regime(p.dim, p.alpha);
        if (reg != Regime::large_holes)
            out.push_back(std::string("sweep-large: alpha ") + num(p.alpha) +
                          " sits in the " + to_string(reg) +
                          " regime, the filtration comparison needs large_holes");
        if (p.epsilons.empty()) out.push_back("sweep-large: epsilons is empty");
        for (double eps : p.epsilons) {
            int res = sweep_row_resolution(eps, p.cells_per_period);
            if (res < 0) {
                out.push_back("sweep-large: cells_per_period / eps is not an integer for eps " +
                              num(eps));
                continue;
            }
            check_perforation(out, "sweep-large eps " + num(eps), p.dim, eps, p.alpha,
                              0.0, p.delta, p.delta3, p.shape, res);
        }
        if (p.alpha == 1.0)
            check_cell_margin(out, "sweep-large unit cell", 2.0 * p.delta, p.cell_resolution);
        else
            for (double eta : p.cell_etas)
                check_cell_margin(out, "sweep-large cell eta " + num(eta), eta,
                                  p.cell_resolution);
        break;
    }
    case Command::poincare: {
        const auto& p = cfg.poincare;
        if (!p.perforated) break;
        if (p.epsilons.empty()) out.push_back("poincare: epsilons is empty");
        for (double eps : p.epsilons) {
            int res = sweep_row_resolution(eps, p.cells_per_period);
            if (res < 0) {
                out.push_back("poincare: cells_per_period / eps is not an integer for eps " +
                              num(eps));
                continue;
            }
            check_perforation(out, "poincare eps " + num(eps), p.dim, eps, p.alpha, 0.0,
                              p.delta, p.delta3, p.shape, res);
        }
        break;
    }
    }
    return out;
}

} // namespace perfhom
