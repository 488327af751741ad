#include "perfhom/krylov.hpp"

#include <cmath>

namespace perfhom {

namespace {

template <class Field, class Op>
KrylovResult cg_impl(const Op& apply, const Field& b, Field& x, double rel_tol, int max_iter) {
    KrylovResult res;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        fill(x, 0.0);
        res.converged = true;
        return res;
    }
    Field r = b;
    Field Ap = b;
    apply(x, Ap);
    axpy(-1.0, Ap, r);
    double rs = dot(r, r);
    double rel = std::sqrt(rs) / bnorm;
    res.relative_residual = rel;
    if (rel <= rel_tol) {
        res.converged = true;
        return res;
    }
    Field p = r;
    for (int it = 1; it <= max_iter; ++it) {
        apply(p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) break; // operator not positive along p
        const double alpha = rs / pAp;
        axpy(alpha, p, x);
        axpy(-alpha, Ap, r);
        const double rs_new = dot(r, r);
        rel = std::sqrt(rs_new) / bnorm;
        res.iterations = it;
        res.history.push_back(rel);
        res.relative_residual = rel;
        if (rel <= rel_tol) {
            res.converged = true;
            return res;
        }
        axpby(1.0, r, rs_new / rs, p);
        rs = rs_new;
    }
    return res;
}

template <class Field, class Op>
KrylovResult bicgstab_impl(const Op& apply, const Field& b, Field& x, double rel_tol, int max_iter) {
    KrylovResult res;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        fill(x, 0.0);
        res.converged = true;
        return res;
    }
    Field r = b;
    Field tmp = b;
    apply(x, tmp);
    axpy(-1.0, tmp, r);
    double rel = norm2(r) / bnorm;
    res.relative_residual = rel;
    if (rel <= rel_tol) {
        res.converged = true;
        return res;
    }
    const Field rhat = r;
    Field p = r;
    Field v = b;
    fill(v, 0.0);
    Field s = v, t = v;
    double rho = dot(rhat, r);
    for (int it = 1; it <= max_iter; ++it) {
        apply(p, v);
        const double rv = dot(rhat, v);
        if (rv == 0.0) break;
        const double alpha = rho / rv;
        copy_into(r, s);
        axpy(-alpha, v, s);
        if (norm2(s) / bnorm <= rel_tol) {
            axpy(alpha, p, x);
            res.iterations = it;
            rel = norm2(s) / bnorm;
            res.history.push_back(rel);
            res.relative_residual = rel;
            res.converged = true;
            return res;
        }
        apply(s, t);
        const double tt = dot(t, t);
        if (tt == 0.0) break;
        const double omega = dot(t, s) / tt;
        if (omega == 0.0) break;
        axpy(alpha, p, x);
        axpy(omega, s, x);
        copy_into(s, r);
        axpy(-omega, t, r);
        rel = norm2(r) / bnorm;
        res.iterations = it;
        res.history.push_back(rel);
        res.relative_residual = rel;
        if (rel <= rel_tol) {
            res.converged = true;
            return res;
        }
        const double rho_new = dot(rhat, r);
        if (rho_new == 0.0) break;
        const double beta = (rho_new / rho) * (alpha / omega);
        // p = r + beta (p − omega v)
        axpy(-omega, v, p);
        axpby(1.0, r, beta, p);
        rho = rho_new;
    }
    return res;
}

} // namespace

KrylovResult cg(const CellOp& apply, const CellField& rhs, CellField& x, double rel_tol, int max_iter) {
    return cg_impl(apply, rhs, x, rel_tol, max_iter);
}
KrylovResult cg(const FaceOp& apply, const FaceField& rhs, FaceField& x, double rel_tol, int max_iter) {
    return cg_impl(apply, rhs, x, rel_tol, max_iter);
}
KrylovResult bicgstab(const CellOp& apply, const CellField& rhs, CellField& x, double rel_tol, int max_iter) {
    return bicgstab_impl(apply, rhs, x, rel_tol, max_iter);
}
KrylovResult bicgstab(const FaceOp& apply, const FaceField& rhs, FaceField& x, double rel_tol, int max_iter) {
    return bicgstab_impl(apply, rhs, x, rel_tol, max_iter);
}

} // namespace perfhom
