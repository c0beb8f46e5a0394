#include "ksns/field_io.hpp"

#include <fstream>
#include <sstream>

namespace ksns {

namespace {

std::string render(const TorusGrid& g, int ncomp, double time,
                   const std::vector<double>& values) {
    std::ostringstream out;
    out << "KSNS1 " << g.dim << ' ' << g.n << ' ' << fmt_g17(g.L) << ' ' << ncomp
        << ' ' << fmt_g17(time) << '\n';
    for (double v : values) out << fmt_g17(v) << '\n';
    return out.str();
}

}  // namespace

ScalarField LoadedField::as_scalar() const {
    if (ncomp != 1) throw ConfigError("field file has ncomp != 1, expected a scalar");
    return ScalarField(grid, values);
}

VectorField LoadedField::as_vector() const {
    if (ncomp != grid.dim)
        throw ConfigError("field file has ncomp != dim, expected a vector field");
    VectorField f(grid);
    f.values() = values;
    return f;
}

void write_field(const std::string& path, const ScalarField& f, double time) {
    atomic_write(path, render(f.grid(), 1, time, f.values()));
}

void write_field(const std::string& path, const VectorField& f, double time) {
    atomic_write(path, render(f.grid(), f.grid().dim, time, f.values()));
}

LoadedField read_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open field file: " + path);
    std::string magic;
    int dim = 0, n = 0, ncomp = 0;
    double L = 0.0, time = 0.0;
    in >> magic >> dim >> n >> L >> ncomp >> time;
    if (!in || magic != "KSNS1")
        throw ConfigError("bad field header in " + path);
    LoadedField lf;
    lf.grid = TorusGrid(dim, n, L);
    lf.ncomp = ncomp;
    lf.time = time;
    const std::size_t total = static_cast<std::size_t>(lf.grid.cells()) * ncomp;
    lf.values.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        in >> lf.values[i];
        if (!in) throw ConfigError("truncated field file: " + path);
    }
    return lf;
}

}  // namespace ksns
