#pragma once

#include <string>

#include "ksns/grid.hpp"

namespace ksns {

/// KSNS1 field file: one ASCII header line
///   KSNS1 <dim> <n> <L> <ncomp> <time>
/// followed by n^dim * ncomp base-10 values, row-major (lexicographic, last
/// axis fastest; components outermost), one per line, 17 significant digits.
struct LoadedField {
    TorusGrid grid;
    int ncomp = 1;
    double time = 0.0;
    std::vector<double> values;  // component-major, ncomp * cells

    ScalarField as_scalar() const;
    VectorField as_vector() const;
};

void write_field(const std::string& path, const ScalarField& f, double time);
void write_field(const std::string& path, const VectorField& f, double time);
LoadedField read_field(const std::string& path);

}  // namespace ksns
