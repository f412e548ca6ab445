#include "nsch/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace nsch {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Entry {
    std::string value;
    int line = 0;
};

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"domain", {"nx", "ny", "lx", "ly", "bc"}},
        {"time", {"dt", "t_end", "snapshot_every"}},
        {"fluids", {"rho1", "rho2", "nu1", "nu2", "power_index", "kappa_reg", "omega", "c1"}},
        {"model",
         {"eps0", "mobility", "eps_mollify", "delta_b", "alpha", "convection_form", "splitting"}},
        {"solver",
         {"elliptic_method", "elliptic_rel_tol", "elliptic_max_iter", "fp_tol", "max_fp_iter",
          "picard_tol", "picard_max_iter", "viscous_rel_tol", "viscous_max_iter"}},
        {"initial", {"type", "amplitude", "seed", "width", "radius", "mean", "value"}},
        {"output", {"binary_snapshots"}},
    };
    return s;
}

class Raw {
public:
    Raw(const std::string& text, const std::string& name) : name_(name) {
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    fail(lineno, "malformed section header '" + line + "'");
                section = trim(line.substr(1, line.size() - 2));
                if (schema().find(section) == schema().end())
                    fail(lineno, "unknown section [" + section + "]");
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) fail(lineno, "expected 'key = value', got '" + line + "'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (section.empty()) fail(lineno, "key '" + key + "' appears before any [section]");
            if (key.empty() || value.empty())
                fail(lineno, "empty key or value in '" + line + "'");
            const auto& allowed = schema().at(section);
            if (allowed.find(key) == allowed.end())
                fail(lineno, "unknown key '" + key + "' in section [" + section + "]");
            const std::string full = section + "." + key;
            auto it = kv_.find(full);
            if (it != kv_.end())
                fail(lineno, "duplicate key '" + full + "' (first set at line " +
                                 std::to_string(it->second.line) + ")");
            kv_[full] = Entry{value, lineno};
        }
    }

    [[noreturn]] void fail(int line, const std::string& what) const {
        throw ConfigError(name_ + ":" + std::to_string(line) + ": " + what);
    }
    [[noreturn]] void fail_key(const std::string& full, const std::string& what) const {
        const auto it = kv_.find(full);
        const int line = (it == kv_.end()) ? 0 : it->second.line;
        throw ConfigError(name_ + ":" + std::to_string(line) + ": key '" + full + "': " + what);
    }

    bool has(const std::string& full) const { return kv_.find(full) != kv_.end(); }

    std::string get_string(const std::string& full, const std::string& dflt) const {
        auto it = kv_.find(full);
        return it == kv_.end() ? dflt : it->second.value;
    }

    double get_double(const std::string& full, double dflt) const {
        auto it = kv_.find(full);
        if (it == kv_.end()) return dflt;
        const char* s = it->second.value.c_str();
        char* end = nullptr;
        const double v = std::strtod(s, &end);
        if (end == s || *end != '\0' || !std::isfinite(v))
            fail_key(full, "'" + it->second.value + "' is not a finite number");
        return v;
    }

    long long get_int(const std::string& full, long long dflt) const {
        auto it = kv_.find(full);
        if (it == kv_.end()) return dflt;
        const char* s = it->second.value.c_str();
        char* end = nullptr;
        const long long v = std::strtoll(s, &end, 10);
        if (end == s || *end != '\0') fail_key(full, "'" + it->second.value + "' is not an integer");
        return v;
    }

    bool get_bool(const std::string& full, bool dflt) const {
        auto it = kv_.find(full);
        if (it == kv_.end()) return dflt;
        const std::string& v = it->second.value;
        if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
        if (v == "false" || v == "no" || v == "0" || v == "off") return false;
        fail_key(full, "'" + v + "' is not a boolean (true|false|yes|no|1|0|on|off)");
    }

private:
    std::string name_;
    std::map<std::string, Entry> kv_;
};

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

void check_range(const std::string& key, double v, double lo, double hi) {
    if (!(v >= lo && v <= hi)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s = %g out of range [%g, %g]", key.c_str(), v, lo, hi);
        bad(buf);
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* initial_name(InitialSpec::Type t) {
    switch (t) {
        case InitialSpec::Type::spinodal: return "spinodal";
        case InitialSpec::Type::stripe: return "stripe";
        case InitialSpec::Type::blob: return "blob";
        case InitialSpec::Type::shear_layer: return "shear-layer";
        case InitialSpec::Type::quiescent: return "quiescent";
    }
    return "spinodal";
}

InitialSpec::Type initial_from_name(const std::string& s) {
    if (s == "spinodal") return InitialSpec::Type::spinodal;
    if (s == "stripe") return InitialSpec::Type::stripe;
    if (s == "blob") return InitialSpec::Type::blob;
    if (s == "shear-layer") return InitialSpec::Type::shear_layer;
    if (s == "quiescent") return InitialSpec::Type::quiescent;
    bad("unknown initial type '" + s + "' (expected spinodal|stripe|blob|shear-layer|quiescent)");
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& name) {
    Raw raw(text, name);
    RunConfig c;

    // [domain]
    const long long nx = raw.get_int("domain.nx", 64);
    const long long ny = raw.get_int("domain.ny", 64);
    if (nx < 8 || nx > 4096) bad("domain.nx = " + std::to_string(nx) + " out of range [8, 4096]");
    if (ny < 8 || ny > 4096) bad("domain.ny = " + std::to_string(ny) + " out of range [8, 4096]");
    const double lx = raw.get_double("domain.lx", double(nx));
    const double ly = raw.get_double("domain.ly", double(ny));
    if (!(lx > 0.0) || !(ly > 0.0)) bad("domain.lx/ly must be positive");
    c.grid.nx = int(nx);
    c.grid.ny = int(ny);
    c.grid.dx = lx / double(nx);
    c.grid.dy = ly / double(ny);
    c.grid.bc = bc_from_name(raw.get_string("domain.bc", "periodic"));

    // [time]
    c.dt = raw.get_double("time.dt", 1e-3);
    c.t_end = raw.get_double("time.t_end", 1.0);
    check_range("time.dt", c.dt, 1e-12, 1e3);
    if (!(c.t_end >= c.dt)) bad("time.t_end must be at least one dt");
    const long long se = raw.get_int("time.snapshot_every", 0);
    if (se < 0) bad("time.snapshot_every must be >= 0");
    c.snapshot_every = int(se);

    // [fluids]
    c.rho1 = raw.get_double("fluids.rho1", 1.0);
    c.rho2 = raw.get_double("fluids.rho2", 1.0);
    c.nu1 = raw.get_double("fluids.nu1", 1.0);
    c.nu2 = raw.get_double("fluids.nu2", 1.0);
    c.power_index = raw.get_double("fluids.power_index", 2.0);
    c.kappa_reg = raw.get_double("fluids.kappa_reg", 1e-8);
    c.omega = raw.get_double("fluids.omega", 0.0);
    c.c1 = raw.get_double("fluids.c1", 0.0);
    if (!(c.rho1 > 0.0) || !(c.rho2 > 0.0)) bad("fluids.rho1/rho2 must be positive");
    if (!(c.nu1 > 0.0) || !(c.nu2 > 0.0)) bad("fluids.nu1/nu2 must be positive");
    check_range("fluids.power_index", c.power_index, 1.1, 4.0);
    check_range("fluids.kappa_reg", c.kappa_reg, 1e-300, 1e-2);
    if (c.omega < 0.0) bad("fluids.omega must be >= 0");
    if (c.c1 < 0.0) bad("fluids.c1 must be >= 0");

    // [model]
    c.eps0 = raw.get_double("model.eps0", 1.0);
    c.mobility = raw.get_double("model.mobility", 1.0);
    c.eps_mollify = raw.get_double("model.eps_mollify", 0.05);
    c.delta_b = raw.get_double("model.delta_b", 0.1);
    c.alpha = raw.get_double("model.alpha", 1.0);
    check_range("model.eps0", c.eps0, 1e-12, 1e6);
    check_range("model.mobility", c.mobility, 1e-300, 1e6);
    if (c.eps_mollify < 0.0) bad("model.eps_mollify must be >= 0");
    if (!(c.delta_b > 0.0 && c.delta_b <= 1.0)) bad("model.delta_b must lie in (0, 1]");
    check_range("model.alpha", c.alpha, 0.0, 100.0);
    {
        const std::string f = raw.get_string("model.convection_form", "advective");
        if (f == "advective") c.convection_form = ConvectionForm::advective;
        else if (f == "conservative") c.convection_form = ConvectionForm::conservative;
        else bad("unknown convection_form '" + f + "' (expected advective|conservative)");
    }
    {
        const std::string f = raw.get_string("model.splitting", "convex-split");
        if (f == "convex-split") c.splitting = PotentialSplitting::convex_split;
        else if (f == "fully-implicit") c.splitting = PotentialSplitting::fully_implicit;
        else bad("unknown splitting '" + f + "' (expected convex-split|fully-implicit)");
    }

    // [solver]
    {
        const std::string m = raw.get_string("solver.elliptic_method", "multigrid");
        if (m == "multigrid") c.elliptic.method = EllipticSolverConfig::Method::multigrid;
        else if (m == "conjugate-gradient")
            c.elliptic.method = EllipticSolverConfig::Method::conjugate_gradient;
        else bad("unknown elliptic_method '" + m + "' (expected multigrid|conjugate-gradient)");
    }
    c.elliptic.rel_tol = raw.get_double("solver.elliptic_rel_tol", 1e-10);
    c.elliptic.max_iter = int(raw.get_int("solver.elliptic_max_iter", 400));
    c.fp_tol = raw.get_double("solver.fp_tol", 1e-10);
    c.max_fp_iter = int(raw.get_int("solver.max_fp_iter", 60));
    c.picard_tol = raw.get_double("solver.picard_tol", 1e-9);
    c.picard_max_iter = int(raw.get_int("solver.picard_max_iter", 30));
    c.viscous_rel_tol = raw.get_double("solver.viscous_rel_tol", 1e-11);
    c.viscous_max_iter = int(raw.get_int("solver.viscous_max_iter", 2000));
    check_range("solver.elliptic_rel_tol", c.elliptic.rel_tol, 1e-16, 1e-2);
    check_range("solver.fp_tol", c.fp_tol, 1e-16, 1e-2);
    check_range("solver.picard_tol", c.picard_tol, 1e-16, 1e-2);
    check_range("solver.viscous_rel_tol", c.viscous_rel_tol, 1e-16, 1e-2);
    if (c.elliptic.max_iter < 1 || c.max_fp_iter < 1 || c.picard_max_iter < 1 ||
        c.viscous_max_iter < 1)
        bad("solver iteration limits must be >= 1");

    // [initial]
    c.initial.type = initial_from_name(raw.get_string("initial.type", "spinodal"));
    c.initial.amplitude = raw.get_double("initial.amplitude", 0.5);
    c.initial.seed = (unsigned long long)raw.get_int("initial.seed", 1);
    c.initial.width = raw.get_double("initial.width", 2.0);
    c.initial.radius = raw.get_double("initial.radius", 0.0);
    c.initial.mean = raw.get_double("initial.mean", 0.0);
    c.initial.value = raw.get_double("initial.value", 0.0);
    if (!(c.initial.width > 0.0)) bad("initial.width must be positive");
    if (c.initial.radius < 0.0) bad("initial.radius must be >= 0");
    check_range("initial.amplitude", c.initial.amplitude, -1e6, 1e6);
    check_range("initial.mean", c.initial.mean, -2.0, 2.0);
    check_range("initial.value", c.initial.value, -2.0, 2.0);

    // [output]
    c.binary_snapshots = raw.get_bool("output.binary_snapshots", false);

    // Cross-field semantic checks (constructors validate positivity).
    DensityLaw law(c.rho1, c.rho2, c.delta_b);
    (void)law;
    FluidParams fp{c.nu1, c.nu2, c.power_index, c.kappa_reg, c.delta_b, c.omega, c.c1};
    if (!(fp.min_viscosity() > 0.0))
        bad("viscosity contrast and delta_b give a non-positive blended viscosity");
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

int RunConfig::nsteps() const {
    const long long n = std::llround(t_end / dt);
    return int(std::max(1LL, n));
}

CoupledConfig RunConfig::coupled_config() const {
    CoupledConfig cc;
    cc.dt = dt;
    cc.eps0 = eps0;
    cc.mobility = mobility;
    cc.eps_mollify = eps_mollify;
    cc.potential = double_well_potential();
    cc.potential.alpha = alpha;
    cc.fluid = FluidParams{nu1, nu2, power_index, kappa_reg, delta_b, omega, c1};
    cc.density = DensityLaw(rho1, rho2, delta_b);
    cc.splitting = splitting;
    cc.convection_form = convection_form;
    cc.ch.fp_tol = fp_tol;
    cc.ch.max_fp_iter = max_fp_iter;
    cc.momentum.projection = elliptic;
    cc.momentum.picard_tol = picard_tol;
    cc.momentum.picard_max_iter = picard_max_iter;
    cc.momentum.viscous_rel_tol = viscous_rel_tol;
    cc.momentum.viscous_max_iter = viscous_max_iter;
    return cc;
}

std::string canonical_config(const RunConfig& c) {
    std::ostringstream o;
    o << "[domain]\n";
    o << "nx = " << c.grid.nx << "\n";
    o << "ny = " << c.grid.ny << "\n";
    o << "lx = " << fmt(c.grid.nx * c.grid.dx) << "\n";
    o << "ly = " << fmt(c.grid.ny * c.grid.dy) << "\n";
    o << "bc = " << bc_name(c.grid.bc) << "\n\n";

    o << "[time]\n";
    o << "dt = " << fmt(c.dt) << "\n";
    o << "t_end = " << fmt(c.t_end) << "\n";
    o << "snapshot_every = " << c.snapshot_every << "\n\n";

    o << "[fluids]\n";
    o << "rho1 = " << fmt(c.rho1) << "\n";
    o << "rho2 = " << fmt(c.rho2) << "\n";
    o << "nu1 = " << fmt(c.nu1) << "\n";
    o << "nu2 = " << fmt(c.nu2) << "\n";
    o << "power_index = " << fmt(c.power_index) << "\n";
    o << "kappa_reg = " << fmt(c.kappa_reg) << "\n";
    o << "omega = " << fmt(c.omega) << "\n";
    o << "c1 = " << fmt(c.c1) << "\n\n";

    o << "[model]\n";
    o << "eps0 = " << fmt(c.eps0) << "\n";
    o << "mobility = " << fmt(c.mobility) << "\n";
    o << "eps_mollify = " << fmt(c.eps_mollify) << "\n";
    o << "delta_b = " << fmt(c.delta_b) << "\n";
    o << "alpha = " << fmt(c.alpha) << "\n";
    o << "convection_form = "
      << (c.convection_form == ConvectionForm::advective ? "advective" : "conservative") << "\n";
    o << "splitting = "
      << (c.splitting == PotentialSplitting::convex_split ? "convex-split" : "fully-implicit")
      << "\n\n";

    o << "[solver]\n";
    o << "elliptic_method = "
      << (c.elliptic.method == EllipticSolverConfig::Method::multigrid ? "multigrid"
                                                                       : "conjugate-gradient")
      << "\n";
    o << "elliptic_rel_tol = " << fmt(c.elliptic.rel_tol) << "\n";
    o << "elliptic_max_iter = " << c.elliptic.max_iter << "\n";
    o << "fp_tol = " << fmt(c.fp_tol) << "\n";
    o << "max_fp_iter = " << c.max_fp_iter << "\n";
    o << "picard_tol = " << fmt(c.picard_tol) << "\n";
    o << "picard_max_iter = " << c.picard_max_iter << "\n";
    o << "viscous_rel_tol = " << fmt(c.viscous_rel_tol) << "\n";
    o << "viscous_max_iter = " << c.viscous_max_iter << "\n\n";

    o << "[initial]\n";
    o << "type = " << initial_name(c.initial.type) << "\n";
    o << "amplitude = " << fmt(c.initial.amplitude) << "\n";
    o << "seed = " << c.initial.seed << "\n";
    o << "width = " << fmt(c.initial.width) << "\n";
    o << "radius = " << fmt(c.initial.radius) << "\n";
    o << "mean = " << fmt(c.initial.mean) << "\n";
    o << "value = " << fmt(c.initial.value) << "\n\n";

    o << "[output]\n";
    o << "binary_snapshots = " << (c.binary_snapshots ? "true" : "false") << "\n";
    return o.str();
}

std::string describe_config(const RunConfig& c) {
    const DensityLaw law(c.rho1, c.rho2, c.delta_b);
    const FluidParams fp{c.nu1, c.nu2, c.power_index, c.kappa_reg, c.delta_b, c.omega, c.c1};
    std::ostringstream o;
    o << "domain: " << c.grid.nx << " x " << c.grid.ny << " " << bc_name(c.grid.bc)
      << ", dx = " << fmt(c.grid.dx) << ", dy = " << fmt(c.grid.dy) << "\n";
    o << "time: dt = " << fmt(c.dt) << ", t_end = " << fmt(c.t_end) << ", steps = " << c.nsteps()
      << "\n";
    o << "density: [" << fmt(std::min(c.rho1, c.rho2)) << ", " << fmt(std::max(c.rho1, c.rho2))
      << "], blend dip bound = " << fmt(law.dip_bound()) << ", min rho = " << fmt(law.min_rho())
      << "\n";
    o << "viscosity: [" << fmt(fp.min_viscosity()) << ", " << fmt(fp.max_viscosity())
      << "], power index = " << fmt(c.power_index) << ", kappa = " << fmt(c.kappa_reg) << "\n";
    o << "coercivity witnesses: omega = " << fmt(fp.effective_omega())
      << ", c1 = " << fmt(fp.effective_c1()) << "\n";
    o << "phase field: eps0 = " << fmt(c.eps0) << ", mobility = " << fmt(c.mobility)
      << ", mollifier = " << fmt(c.eps_mollify) << "\n";
    o << "elliptic: "
      << (c.elliptic.method == EllipticSolverConfig::Method::multigrid ? "multigrid"
                                                                       : "conjugate-gradient")
      << " (rel_tol " << fmt(c.elliptic.rel_tol) << ", max_iter " << c.elliptic.max_iter << ")\n";
    o << "initial: " << initial_name(c.initial.type) << " (amplitude "
      << fmt(c.initial.amplitude) << ", seed " << c.initial.seed << ")\n";
    const double ifc = c.eps0 / std::max(c.grid.dx, c.grid.dy);
    o << "interface resolution: eps0/dx = " << fmt(ifc)
      << (ifc < 1.0 ? "  (warning: interface thinner than one cell)" : "") << "\n";
    return o.str();
}

RunConfig preset_config(const std::string& name) {
    if (name == "spinodal_64") {
        RunConfig c;
        c.grid = Grid{64, 64, 1.0, 1.0, BC::periodic};
        c.dt = 1e-3;
        c.t_end = 0.25;
        c.snapshot_every = 50;
        c.initial.type = InitialSpec::Type::spinodal;
        c.initial.amplitude = 0.05;
        c.initial.seed = 7;
        c.initial.mean = 0.0;
        return c;
    }
    if (name == "shear_powerlaw") {
        RunConfig c;
        c.grid = Grid{64, 64, 1.0 / 64.0, 1.0 / 64.0, BC::periodic};
        c.dt = 5e-4;
        c.t_end = 0.05;
        c.snapshot_every = 20;
        c.nu1 = 1.0;
        c.nu2 = 0.5;
        c.power_index = 1.8;
        c.eps0 = 0.05;
        c.mobility = 1e-4;
        c.eps_mollify = 1e-3;
        c.initial.type = InitialSpec::Type::shear_layer;
        c.initial.amplitude = 1.0;
        c.initial.width = 0.05;
        return c;
    }
    if (name == "density_contrast") {
        RunConfig c;
        c.grid = Grid{64, 64, 1.0 / 64.0, 1.0 / 64.0, BC::physical};
        c.dt = 5e-4;
        c.t_end = 0.05;
        c.snapshot_every = 20;
        c.rho1 = 1.0;
        c.rho2 = 3.0;
        c.nu1 = 0.1;
        c.nu2 = 0.1;
        c.eps0 = 0.05;
        c.mobility = 1e-4;
        c.eps_mollify = 1e-3;
        c.initial.type = InitialSpec::Type::blob;
        c.initial.width = 0.05;
        c.initial.radius = 0.2;
        return c;
    }
    throw ConfigError("unknown preset '" + name +
                      "' (expected spinodal_64|shear_powerlaw|density_contrast)");
}

} // namespace nsch
