#include "perfhom/dense_oracle.hpp"

#include <Eigen/Dense>

#include "perfhom/errors.hpp"

namespace perfhom {

namespace {

struct FluidIndex {
    // flat-order enumeration of fluid faces (component-major) and fluid cells
    std::vector<std::ptrdiff_t> face_slot[3]; // array slot -> fluid ordinal or -1
    std::vector<std::size_t> face_list[3];
    std::vector<std::ptrdiff_t> cell_slot;
    std::vector<std::size_t> cell_list;
    std::size_t nf = 0, nc = 0;

    explicit FluidIndex(const Mask& m) {
        const Grid& g = m.grid;
        for (int a = 0; a < g.dim; ++a) {
            face_slot[a].assign(m.face[a].size(), -1);
            for (std::size_t f = 0; f < m.face[a].size(); ++f) {
                if (m.face[a][f]) {
                    face_slot[a][f] = static_cast<std::ptrdiff_t>(nf++);
                    face_list[a].push_back(f);
                }
            }
        }
        cell_slot.assign(m.cell.size(), -1);
        for (std::size_t c = 0; c < m.cell.size(); ++c) {
            if (m.cell[c]) {
                cell_slot[c] = static_cast<std::ptrdiff_t>(nc++);
                cell_list.push_back(c);
            }
        }
    }
};

} // namespace

DenseOracleResult dense_solve_saddle(const SaddleSystem& sys) {
    sys.validate();
    const Mask& mask = *sys.mask;
    const Grid& g = mask.grid;
    MacOps ops(mask);
    FluidIndex idx(mask);

    const std::size_t n = idx.nf + idx.nc + 1;
    if (n > 5000)
        throw precondition_error("dense saddle oracle limited to 5000 unknowns");

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);

    FaceField eu = FaceField::zeros(g), fu = FaceField::zeros(g);
    CellField ep = CellField::zeros(g), fp = CellField::zeros(g);

    // velocity columns: A block and D block
    std::size_t col = 0;
    for (int a = 0; a < g.dim; ++a) {
        for (std::size_t f : idx.face_list[a]) {
            eu.comp[a][f] = 1.0;
            ops.viscous(eu, fu, sys.viscosity, sys.shift);
            for (int aa = 0; aa < g.dim; ++aa)
                for (std::size_t ff : idx.face_list[aa])
                    K(idx.face_slot[aa][ff], col) = fu.comp[aa][ff];
            ops.divergence(eu, fp);
            for (std::size_t cc : idx.cell_list)
                K(idx.nf + idx.cell_slot[cc], col) = fp.v[cc];
            eu.comp[a][f] = 0.0;
            ++col;
        }
    }
    // pressure columns: G block plus the mean row
    for (std::size_t c : idx.cell_list) {
        ep.v[c] = 1.0;
        ops.gradient(ep, fu);
        for (int aa = 0; aa < g.dim; ++aa)
            for (std::size_t ff : idx.face_list[aa])
                K(idx.face_slot[aa][ff], col) = fu.comp[aa][ff];
        K(n - 1, col) = 1.0;
        ep.v[c] = 0.0;
        ++col;
    }
    // multiplier column closing the divergence rows
    for (std::size_t i = 0; i < idx.nc; ++i) K(idx.nf + i, n - 1) = 1.0;

    for (int a = 0; a < g.dim; ++a)
        for (std::size_t f : idx.face_list[a])
            b(idx.face_slot[a][f]) = sys.rhs_velocity.comp[a][f];
    for (std::size_t c : idx.cell_list)
        b(idx.nf + idx.cell_slot[c]) = sys.rhs_divergence.v[c];

    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    Eigen::VectorXd x = lu.solve(b);
    const double bnorm = b.norm();
    const double res = (K * x - b).norm() / (bnorm > 0.0 ? bnorm : 1.0);
    if (res > 1e-8)
        throw compatibility_error("saddle data is not in the range of the singular operator");

    DenseOracleResult out{FaceField::zeros(g), CellField::zeros(g), res};
    for (int a = 0; a < g.dim; ++a)
        for (std::size_t f : idx.face_list[a])
            out.velocity.comp[a][f] = x(idx.face_slot[a][f]);
    for (std::size_t c : idx.cell_list)
        out.pressure.v[c] = x(idx.nf + idx.cell_slot[c]);
    ops.project_zero_mean(out.pressure);
    return out;
}

} // namespace perfhom
