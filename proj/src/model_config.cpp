#include "elute/model_config.hpp"

#include "elute/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

using nlohmann::json;

namespace elute {

namespace {

double require_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw ConfigError(where + "." + key + ": missing or non-numeric");
    }
    return j[key].get<double>();
}

double positive(const json& j, const std::string& key, const std::string& where) {
    const double v = require_number(j, key, where);
    if (!(v > 0.0)) {
        throw ConfigError(where + "." + key + ": must be positive");
    }
    return v;
}

double porosity(const json& j, const std::string& key, const std::string& where) {
    const double v = require_number(j, key, where);
    if (!(v > 0.0) || !(v < 1.0)) {
        throw ConfigError(where + "." + key + ": must lie strictly between 0 and 1");
    }
    return v;
}

Eigen::VectorXd component_vector(const json& j, const std::string& key, int n,
                                 const std::string& where, bool required,
                                 double fallback = 0.0) {
    if (!j.contains(key)) {
        if (required) {
            throw ConfigError(where + "." + key + ": missing");
        }
        return Eigen::VectorXd::Constant(n, fallback);
    }
    const json& v = j[key];
    Eigen::VectorXd out(n);
    if (v.is_number()) {
        out.setConstant(v.get<double>());
    } else if (v.is_array() && static_cast<int>(v.size()) == n) {
        for (int i = 0; i < n; ++i) {
            if (!v[i].is_number()) {
                throw ConfigError(where + "." + key + ": non-numeric entry");
            }
            out[i] = v[i].get<double>();
        }
    } else {
        throw ConfigError(where + "." + key + ": expected scalar or array of length "
                          + std::to_string(n));
    }
    if ((out.array() < 0.0).any()) {
        throw ConfigError(where + "." + key + ": entries must be non-negative");
    }
    return out;
}

SmaConfig parse_binding(const json& j, int n_comp, const std::string& where) {
    SmaConfig b;
    const int m = n_comp - 1;
    if (m < 1) {
        throw ConfigError(where + ": SMA binding needs a salt plus protein components");
    }
    if (j.value("model", "sma") != "sma") {
        throw ConfigError(where + ".model: only 'sma' is supported");
    }
    const std::string mode = j.value("mode", "dynamic");
    if (mode == "dynamic") {
        b.mode = SmaParams::Mode::dynamic_binding;
    } else if (mode == "quasi_stationary") {
        b.mode = SmaParams::Mode::quasi_stationary;
    } else {
        throw ConfigError(where + ".mode: expected 'dynamic' or 'quasi_stationary'");
    }
    if (j.contains("keq")) {
        b.via_keq = true;
        b.keq = component_vector(j, "keq", m, where, true);
        b.kinetic_rate = positive(j, "kinetic_rate", where);
    } else {
        b.ka = component_vector(j, "ka", m, where, true);
        b.kd = component_vector(j, "kd", m, where, true);
    }
    b.nu = component_vector(j, "nu", m, where, true);
    b.steric = component_vector(j, "steric", m, where, true);
    if (j.contains("capacity_titration")) {
        const json& t = j["capacity_titration"];
        const std::string tw = where + ".capacity_titration";
        b.capacity = ionic_capacity(positive(t, "salt_concentration", tw),
                                    positive(t, "titration_volume", tw),
                                    positive(t, "column_volume", tw),
                                    require_number(t, "total_porosity", tw));
    } else {
        b.capacity = positive(j, "capacity", where);
    }
    b.qs_rate_scale = j.value("qs_rate_scale", 1e4);
    if (!(b.qs_rate_scale > 0.0)) {
        throw ConfigError(where + ".qs_rate_scale: must be positive");
    }
    return b;
}

} // namespace

ColumnSystem parse_model_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": JSON parse error: " + e.what());
    }

    ColumnSystem sys;
    if (!j.contains("components") || !j["components"].is_number_integer()) {
        throw ConfigError(origin + ": components: missing integer field");
    }
    sys.n_components = j["components"].get<int>();
    if (sys.n_components < 1) {
        throw ConfigError(origin + ": components: must be >= 1");
    }
    sys.flow_rate = positive(j, "flow_rate", origin);

    if (!j.contains("units") || !j["units"].is_array() || j["units"].empty()) {
        throw ConfigError(origin + ": units: expected non-empty array");
    }
    for (size_t u = 0; u < j["units"].size(); ++u) {
        const json& ju = j["units"][u];
        const std::string where = "units[" + std::to_string(u) + "]";
        UnitConfig unit;
        const std::string type = ju.value("type", "");
        if (type == "cstr") {
            unit.type = UnitConfig::Type::cstr;
            unit.cstr.volume = positive(ju, "volume", where);
            unit.cstr.flow_rate = sys.flow_rate;
        } else if (type == "dpfr") {
            unit.type = UnitConfig::Type::dpfr;
            unit.dpfr.length = positive(ju, "length", where);
            unit.dpfr.dispersion = require_number(ju, "dispersion", where);
            if (unit.dpfr.dispersion < 0.0) {
                throw ConfigError(where + ".dispersion: must be non-negative");
            }
            unit.dpfr.tubing_radius = positive(ju, "tubing_radius", where);
        } else if (type == "grm") {
            unit.type = UnitConfig::Type::grm;
            unit.grm.length = positive(ju, "length", where);
            unit.grm.diameter = positive(ju, "diameter", where);
            unit.grm.particle_radius = positive(ju, "particle_radius", where);
            unit.grm.col_porosity = porosity(ju, "col_porosity", where);
            unit.grm.particle_porosity = porosity(ju, "particle_porosity", where);
            unit.grm.dispersion = require_number(ju, "dispersion", where);
            if (unit.grm.dispersion < 0.0) {
                throw ConfigError(where + ".dispersion: must be non-negative");
            }
            unit.grm.film = component_vector(ju, "film", sys.n_components, where, true);
            unit.grm.pore_diffusion =
                component_vector(ju, "pore_diffusion", sys.n_components, where, true);
            unit.grm.surface_diffusion =
                component_vector(ju, "surface_diffusion", sys.n_components, where, false, 0.0);
            if (ju.contains("binding")) {
                unit.grm.binding =
                    parse_binding(ju["binding"], sys.n_components, where + ".binding");
            }
        } else if (type == "bypass") {
            unit.type = UnitConfig::Type::bypass;
        } else {
            throw ConfigError(where + ".type: expected cstr|dpfr|grm|bypass");
        }
        sys.units.push_back(std::move(unit));
    }

    if (!j.contains("inlet") || !j["inlet"].contains("segments")) {
        throw ConfigError(origin + ": inlet.segments: missing");
    }
    std::vector<InletSegment> segments;
    const json& js = j["inlet"]["segments"];
    for (size_t s = 0; s < js.size(); ++s) {
        const json& seg = js[s];
        const std::string where = "inlet.segments[" + std::to_string(s) + "]";
        InletSegment is;
        is.duration = positive(seg, "duration", where);
        const std::string kind = seg.value("kind", "step");
        auto conc = [&](const char* key) {
            Eigen::VectorXd v(sys.n_components);
            if (!seg.contains(key) || !seg[key].is_array()
                || static_cast<int>(seg[key].size()) != sys.n_components) {
                throw ConfigError(where + "." + key + ": expected array of length "
                                  + std::to_string(sys.n_components));
            }
            for (int i = 0; i < sys.n_components; ++i) {
                v[i] = seg[key][i].get<double>();
            }
            return v;
        };
        if (kind == "step") {
            is.c_start = conc("concentrations");
            is.c_end = is.c_start;
        } else if (kind == "gradient") {
            is.c_start = conc("from");
            is.c_end = conc("to");
        } else {
            throw ConfigError(where + ".kind: expected step|gradient");
        }
        segments.push_back(std::move(is));
    }
    sys.inlet = InletProfile(sys.n_components, std::move(segments));

    if (j.contains("discretization")) {
        const json& jd = j["discretization"];
        sys.disc.axial_cells = jd.value("axial_cells", 100);
        sys.disc.radial_shells = jd.value("radial_shells", 10);
        sys.disc.rel_tol = jd.value("rel_tol", 1e-6);
        sys.disc.abs_tol = jd.value("abs_tol", 1e-8);
        sys.dpfr_cells = jd.value("dpfr_cells", 100);
        sys.coupling_points = jd.value("coupling_points", 0);
        if (sys.disc.axial_cells < 2 || sys.disc.radial_shells < 1 || sys.dpfr_cells < 2) {
            throw ConfigError(origin + ": discretization: cell counts out of range");
        }
        if (!(sys.disc.rel_tol > 0.0) || !(sys.disc.abs_tol > 0.0)) {
            throw ConfigError(origin + ": discretization: tolerances must be positive");
        }
    }

    if (!j.contains("output")) {
        throw ConfigError(origin + ": output: missing block");
    }
    const json& jo = j["output"];
    if (jo.contains("times")) {
        for (const auto& t : jo["times"]) {
            sys.output_times.push_back(t.get<double>());
        }
    } else {
        const double t_end = positive(jo, "t_end", origin + ": output");
        const int points = jo.value("points", 200);
        if (points < 2) {
            throw ConfigError(origin + ": output.points: must be >= 2");
        }
        for (int i = 0; i < points; ++i) {
            sys.output_times.push_back(t_end * static_cast<double>(i) / (points - 1));
        }
    }
    return sys;
}

ColumnSystem load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open model file: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_json(ss.str(), path);
}

namespace {

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string item;
    while (std::getline(ss, item, '/')) {
        if (!item.empty()) {
            parts.push_back(item);
        }
    }
    return parts;
}

int parse_index(const std::string& s, const std::string& path) {
    try {
        return std::stoi(s);
    } catch (const std::exception&) {
        throw ConfigError("parameter path '" + path + "': expected numeric index, got '" + s
                          + "'");
    }
}

} // namespace

FieldRef resolve_field(const ColumnSystem& system, const std::string& path) {
    const auto parts = split_path(path);
    if (parts.size() < 3 || parts[0] != "units") {
        throw ConfigError("parameter path '" + path + "': expected units/<index>/<field>...");
    }
    FieldRef ref;
    ref.unit = parse_index(parts[1], path);
    if (ref.unit < 0 || ref.unit >= static_cast<int>(system.units.size())) {
        throw ConfigError("parameter path '" + path + "': unit index out of range");
    }
    const UnitConfig& unit = system.units[ref.unit];
    using F = FieldRef::Field;
    size_t next = 3;
    const std::string& field = parts[2];
    if (unit.type == UnitConfig::Type::cstr) {
        if (field != "volume") {
            throw ConfigError("parameter path '" + path + "': CSTR exposes 'volume'");
        }
        ref.field = F::cstr_volume;
    } else if (unit.type == UnitConfig::Type::dpfr) {
        if (field == "length") {
            ref.field = F::dpfr_length;
        } else if (field == "dispersion") {
            ref.field = F::dpfr_dispersion;
        } else {
            throw ConfigError("parameter path '" + path
                              + "': DPFR exposes 'length' and 'dispersion'");
        }
    } else if (unit.type == UnitConfig::Type::grm) {
        if (field == "dispersion") {
            ref.field = F::grm_dispersion;
        } else if (field == "col_porosity") {
            ref.field = F::grm_col_porosity;
        } else if (field == "particle_porosity") {
            ref.field = F::grm_particle_porosity;
        } else if (field == "film") {
            ref.field = F::grm_film;
        } else if (field == "pore_diffusion") {
            ref.field = F::grm_pore_diffusion;
        } else if (field == "surface_diffusion") {
            ref.field = F::grm_surface_diffusion;
        } else if (field == "binding") {
            if (!unit.grm.binding) {
                throw ConfigError("parameter path '" + path + "': unit has no binding block");
            }
            if (parts.size() < 4) {
                throw ConfigError("parameter path '" + path + "': binding field missing");
            }
            const std::string& bf = parts[3];
            next = 4;
            if (bf == "keq") {
                if (!unit.grm.binding->via_keq) {
                    throw ConfigError("parameter path '" + path
                                      + "': binding not parameterized via keq");
                }
                ref.field = F::sma_keq;
            } else if (bf == "nu") {
                ref.field = F::sma_nu;
            } else if (bf == "steric") {
                ref.field = F::sma_steric;
            } else if (bf == "capacity") {
                ref.field = F::sma_capacity;
            } else if (bf == "kinetic_rate") {
                ref.field = F::sma_kinetic_rate;
            } else {
                throw ConfigError("parameter path '" + path + "': unknown binding field '" + bf
                                  + "'");
            }
        } else {
            throw ConfigError("parameter path '" + path + "': unknown GRM field '" + field
                              + "'");
        }
    } else {
        throw ConfigError("parameter path '" + path + "': bypass units expose no parameters");
    }
    if (parts.size() > next) {
        ref.component = parse_index(parts[next], path);
    }
    return ref;
}

namespace {

Eigen::VectorXd* vector_field(ColumnSystem& system, const FieldRef& ref) {
    UnitConfig& u = system.units[ref.unit];
    using F = FieldRef::Field;
    switch (ref.field) {
    case F::grm_film:
        return &u.grm.film;
    case F::grm_pore_diffusion:
        return &u.grm.pore_diffusion;
    case F::grm_surface_diffusion:
        return &u.grm.surface_diffusion;
    case F::sma_keq:
        return &u.grm.binding->keq;
    case F::sma_nu:
        return &u.grm.binding->nu;
    case F::sma_steric:
        return &u.grm.binding->steric;
    default:
        return nullptr;
    }
}

double* scalar_field(ColumnSystem& system, const FieldRef& ref) {
    UnitConfig& u = system.units[ref.unit];
    using F = FieldRef::Field;
    switch (ref.field) {
    case F::cstr_volume:
        return &u.cstr.volume;
    case F::dpfr_length:
        return &u.dpfr.length;
    case F::dpfr_dispersion:
        return &u.dpfr.dispersion;
    case F::grm_dispersion:
        return &u.grm.dispersion;
    case F::grm_col_porosity:
        return &u.grm.col_porosity;
    case F::grm_particle_porosity:
        return &u.grm.particle_porosity;
    case F::sma_capacity:
        return &u.grm.binding->capacity;
    case F::sma_kinetic_rate:
        return &u.grm.binding->kinetic_rate;
    default:
        return nullptr;
    }
}

} // namespace

void apply_field(ColumnSystem& system, const FieldRef& ref, double value) {
    if (auto* vec = vector_field(system, ref)) {
        if (ref.component >= 0) {
            if (ref.component >= vec->size()) {
                throw ConfigError("parameter component index out of range");
            }
            (*vec)[ref.component] = value;
        } else {
            vec->setConstant(value);
        }
        return;
    }
    *scalar_field(system, ref) = value;
}

double read_field(const ColumnSystem& system, const FieldRef& ref) {
    auto& mutable_system = const_cast<ColumnSystem&>(system);
    if (auto* vec = vector_field(mutable_system, ref)) {
        return (*vec)[std::max(ref.component, 0)];
    }
    return *scalar_field(mutable_system, ref);
}

} // namespace elute
