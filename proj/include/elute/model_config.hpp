#pragma once

#include "elute/system.hpp"

#include <string>
#include <vector>

namespace elute {

/// Parses the hierarchical model file (units in flow order, inlet segments,
/// discretization and output blocks) into a ColumnSystem. Validation errors
/// name the offending field, e.g. "units[2].col_porosity".
ColumnSystem load_model_file(const std::string& path);
ColumnSystem parse_model_json(const std::string& text, const std::string& origin);

/// Compiled reference to one adjustable scalar inside a ColumnSystem, e.g.
/// "units/2/col_porosity" or "units/2/binding/keq/0". A path without a
/// trailing component index addresses every entry of a per-component vector.
struct FieldRef {
    int unit = -1;
    enum class Field {
        cstr_volume,
        dpfr_length,
        dpfr_dispersion,
        grm_dispersion,
        grm_col_porosity,
        grm_particle_porosity,
        grm_film,
        grm_pore_diffusion,
        grm_surface_diffusion,
        sma_keq,
        sma_nu,
        sma_steric,
        sma_capacity,
        sma_kinetic_rate,
    } field = Field::cstr_volume;
    int component = -1; // -1 -> all components of a vector field
};

FieldRef resolve_field(const ColumnSystem& system, const std::string& path);
void apply_field(ColumnSystem& system, const FieldRef& ref, double value);
double read_field(const ColumnSystem& system, const FieldRef& ref);

} // namespace elute
