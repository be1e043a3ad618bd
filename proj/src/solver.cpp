#include "finray/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "finray/error.hpp"

namespace finray {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat3 = Eigen::Matrix<double, 3, 3>;

double wrap_pi(double x) {
    return x - 2.0 * std::numbers::pi * std::round(x / (2.0 * std::numbers::pi));
}

struct ElementGeom {
    int dof[6];
    double ey, ez;   // unit axis, node i -> j
    double length;
    double ea;       // E*A
    double ei;       // E*I
};

std::vector<ElementGeom> element_geometry(const PlanarFrame& frame) {
    std::vector<ElementGeom> out;
    out.reserve(frame.elements.size());
    for (const BeamSpec& el : frame.elements) {
        ElementGeom g{};
        const Point2& a = frame.nodes[static_cast<std::size_t>(el.node_i)];
        const Point2& b = frame.nodes[static_cast<std::size_t>(el.node_j)];
        const double dy = b.y - a.y, dz = b.z - a.z;
        g.length = std::hypot(dy, dz);
        g.ey = dy / g.length;
        g.ez = dz / g.length;
        for (int k = 0; k < 3; ++k) {
            g.dof[k] = 3 * el.node_i + k;
            g.dof[3 + k] = 3 * el.node_j + k;
        }
        g.ea = el.material.youngs_modulus * el.section.area;
        g.ei = el.material.youngs_modulus * el.section.second_moment;
        out.push_back(g);
    }
    return out;
}

Mat6 local_linear_stiffness(double ea, double ei, double L) {
    Mat6 k = Mat6::Zero();
    const double L2 = L * L, L3 = L2 * L;
    k(0, 0) = ea / L;
    k(0, 3) = -ea / L;
    k(3, 3) = ea / L;
    k(1, 1) = 12.0 * ei / L3;
    k(1, 2) = 6.0 * ei / L2;
    k(1, 4) = -12.0 * ei / L3;
    k(1, 5) = 6.0 * ei / L2;
    k(2, 2) = 4.0 * ei / L;
    k(2, 4) = -6.0 * ei / L2;
    k(2, 5) = 2.0 * ei / L;
    k(4, 4) = 12.0 * ei / L3;
    k(4, 5) = -6.0 * ei / L2;
    k(5, 5) = 4.0 * ei / L;
    return k.selfadjointView<Eigen::Upper>();
}

Mat6 transformation(double ey, double ez) {
    Mat6 t = Mat6::Zero();
    for (int n = 0; n < 2; ++n) {
        const int o = 3 * n;
        t(o + 0, o + 0) = ey;
        t(o + 0, o + 1) = ez;
        t(o + 1, o + 0) = -ez;
        t(o + 1, o + 1) = ey;
        t(o + 2, o + 2) = 1.0;
    }
    return t;
}

Mat6 global_linear_stiffness(const ElementGeom& g) {
    const Mat6 t = transformation(g.ey, g.ez);
    return t.transpose() * local_linear_stiffness(g.ea, g.ei, g.length) * t;
}

/// Corotational kinematics and natural forces at a nodal state.
struct CorotState {
    double c, s, L;       // current chord direction and length
    double N, Ma, Mb;     // natural axial force and end moments
    Vec6 r, z;
    double theta_a, theta_b;
};

CorotState corot_state(const ElementGeom& g, const PlanarFrame& frame, std::size_t e,
                       const Eigen::VectorXd& q) {
    const BeamSpec& el = frame.elements[e];
    const Point2& A = frame.nodes[static_cast<std::size_t>(el.node_i)];
    const Point2& B = frame.nodes[static_cast<std::size_t>(el.node_j)];
    const double ya = A.y + q[g.dof[0]], za = A.z + q[g.dof[1]];
    const double yb = B.y + q[g.dof[3]], zb = B.z + q[g.dof[4]];
    CorotState st{};
    const double dy = yb - ya, dz = zb - za;
    st.L = std::hypot(dy, dz);
    if (st.L < 1e-12)
        throw Error::numeric("element collapsed to zero length during solve");
    st.c = dy / st.L;
    st.s = dz / st.L;
    const double beta0 = std::atan2(g.ez, g.ey);
    const double beta = std::atan2(dz, dy);
    const double rigid = wrap_pi(beta - beta0);
    st.theta_a = q[g.dof[2]] - rigid;
    st.theta_b = q[g.dof[5]] - rigid;
    const double L0 = g.length;
    st.N = g.ea / L0 * (st.L - L0);
    st.Ma = g.ei / L0 * (4.0 * st.theta_a + 2.0 * st.theta_b);
    st.Mb = g.ei / L0 * (2.0 * st.theta_a + 4.0 * st.theta_b);
    st.r << -st.c, -st.s, 0.0, st.c, st.s, 0.0;
    st.z << st.s, -st.c, 0.0, -st.s, st.c, 0.0;
    return st;
}

Vec6 corot_internal_force(const CorotState& st) {
    Vec6 f = st.N * st.r;
    f -= (st.Ma + st.Mb) / st.L * st.z;
    f[2] += st.Ma;
    f[5] += st.Mb;
    return f;
}

Mat6 corot_tangent(const ElementGeom& g, const CorotState& st) {
    const double L0 = g.length;
    Eigen::Matrix<double, 3, 6> B;
    B.row(0) = st.r.transpose();
    B.row(1) = -st.z.transpose() / st.L;
    B.row(2) = -st.z.transpose() / st.L;
    B(1, 2) += 1.0;
    B(2, 5) += 1.0;
    Mat3 C = Mat3::Zero();
    C(0, 0) = g.ea / L0;
    C(1, 1) = 4.0 * g.ei / L0;
    C(1, 2) = 2.0 * g.ei / L0;
    C(2, 1) = 2.0 * g.ei / L0;
    C(2, 2) = 4.0 * g.ei / L0;
    Mat6 k = B.transpose() * C * B;
    k += st.N / st.L * st.z * st.z.transpose();
    k += (st.Ma + st.Mb) / (st.L * st.L) *
         (st.r * st.z.transpose() + st.z * st.r.transpose());
    return k;
}

/// Prescribed value per dof at full load; unset entries are free.
std::vector<std::optional<double>> constraint_table(const PlanarFrame& frame,
                                                    const LoadCase& load) {
    const int ndof = 3 * static_cast<int>(frame.nodes.size());
    std::vector<std::optional<double>> fixed(static_cast<std::size_t>(ndof));
    for (int s : frame.supports) {
        fixed[static_cast<std::size_t>(3 * s)] = 0.0;
        fixed[static_cast<std::size_t>(3 * s + 1)] = 0.0;
        fixed[static_cast<std::size_t>(3 * s + 2)] = 0.0;
    }
    for (const auto& [node, c] : load.prescribed) {
        if (node < 0 || node >= static_cast<int>(frame.nodes.size()))
            throw Error::config("load case references node out of range");
        if (c.dy)
            fixed[static_cast<std::size_t>(3 * node)] = *c.dy;
        if (c.dz)
            fixed[static_cast<std::size_t>(3 * node + 1)] = *c.dz;
    }
    for (const auto& [node, f] : load.forces) {
        (void)f;
        if (node < 0 || node >= static_cast<int>(frame.nodes.size()))
            throw Error::config("load case references node out of range");
    }
    return fixed;
}

struct DofPartition {
    std::vector<int> free_index;  // dof -> position among free dofs, or -1
    std::vector<int> free_dofs;   // position -> dof
};

DofPartition partition(const std::vector<std::optional<double>>& fixed) {
    DofPartition p;
    p.free_index.assign(fixed.size(), -1);
    for (std::size_t d = 0; d < fixed.size(); ++d) {
        if (!fixed[d]) {
            p.free_index[d] = static_cast<int>(p.free_dofs.size());
            p.free_dofs.push_back(static_cast<int>(d));
        }
    }
    return p;
}

Eigen::VectorXd external_force(const PlanarFrame& frame, const LoadCase& load, double scale) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(3 * static_cast<int>(frame.nodes.size()));
    for (const auto& [node, fo] : load.forces) {
        f[3 * node] += scale * fo.y;
        f[3 * node + 1] += scale * fo.z;
    }
    return f;
}

SpMat reduced_matrix(const std::vector<Triplet>& trips, const DofPartition& p, int ndof) {
    std::vector<Triplet> red;
    red.reserve(trips.size());
    for (const Triplet& t : trips) {
        const int i = p.free_index[static_cast<std::size_t>(t.row())];
        const int j = p.free_index[static_cast<std::size_t>(t.col())];
        if (i >= 0 && j >= 0)
            red.emplace_back(i, j, t.value());
    }
    (void)ndof;
    SpMat m(static_cast<int>(p.free_dofs.size()), static_cast<int>(p.free_dofs.size()));
    m.setFromTriplets(red.begin(), red.end());
    return m;
}

double inverse_iteration_min_eig(const Eigen::SimplicialLDLT<SpMat>& fact, const SpMat& K) {
    const int n = static_cast<int>(K.rows());
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = 1.0 + 0.01 * std::sin(static_cast<double>(i));
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd w = fact.solve(v);
        const double nw = w.norm();
        if (!(nw > 0.0) || !std::isfinite(nw))
            break;
        w /= nw;
        const double next = w.dot(K * w);
        if (it > 2 && std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next))) {
            lambda = next;
            break;
        }
        lambda = next;
        v = w;
    }
    return lambda;
}

/// Smallest eigenvalue of a sparse symmetric matrix: dense solve for small
/// systems, LDLT inertia + inverse iteration or shift bisection otherwise.
double sparse_min_eigenvalue(const SpMat& K) {
    const int n = static_cast<int>(K.rows());
    if (n == 0)
        return 0.0;
    if (n <= 400)
        return smallest_symmetric_eigenvalue(Eigen::MatrixXd(K));

    Eigen::SimplicialLDLT<SpMat> fact(K);
    if (fact.info() == Eigen::Success && (fact.vectorD().array() > 0.0).all())
        return inverse_iteration_min_eig(fact, K);

    // Indefinite: bisect on the shift using factorization inertia.
    double lo = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (SpMat::InnerIterator it(K, i); it; ++it)
            row += std::abs(it.value());
        lo = std::min(lo, -row);
    }
    double hi = 0.0;
    SpMat I(n, n);
    I.setIdentity();
    for (int it = 0; it < 60 && (hi - lo) > 1e-10 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        SpMat shifted = K - mid * I;
        Eigen::SimplicialLDLT<SpMat> f(shifted);
        bool any_nonpos = f.info() != Eigen::Success;
        if (!any_nonpos)
            any_nonpos = !(f.vectorD().array() > 0.0).all();
        if (any_nonpos)
            hi = mid;  // an eigenvalue lies below mid
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

struct Assembled {
    std::vector<Triplet> triplets;
    Eigen::VectorXd internal;  // nonlinear only
};

Assembled assemble_linear(const PlanarFrame& frame, const std::vector<ElementGeom>& geom) {
    Assembled a;
    a.triplets.reserve(geom.size() * 36);
    for (const ElementGeom& g : geom) {
        const Mat6 k = global_linear_stiffness(g);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                a.triplets.emplace_back(g.dof[i], g.dof[j], k(i, j));
    }
    (void)frame;
    return a;
}

Assembled assemble_corotational(const PlanarFrame& frame, const std::vector<ElementGeom>& geom,
                                const Eigen::VectorXd& q) {
    Assembled a;
    a.triplets.reserve(geom.size() * 36);
    a.internal = Eigen::VectorXd::Zero(q.size());
    for (std::size_t e = 0; e < geom.size(); ++e) {
        const ElementGeom& g = geom[e];
        const CorotState st = corot_state(g, frame, e, q);
        const Vec6 f = corot_internal_force(st);
        const Mat6 k = corot_tangent(g, st);
        for (int i = 0; i < 6; ++i) {
            a.internal[g.dof[i]] += f[i];
            for (int j = 0; j < 6; ++j)
                a.triplets.emplace_back(g.dof[i], g.dof[j], k(i, j));
        }
    }
    return a;
}

void fill_reactions(const PlanarFrame& frame, const std::vector<std::optional<double>>& fixed,
                    const Eigen::VectorXd& residual_all, SolveResult& res) {
    res.reactions.clear();
    const int n = static_cast<int>(frame.nodes.size());
    for (int node = 0; node < n; ++node) {
        const bool cy = static_cast<bool>(fixed[static_cast<std::size_t>(3 * node)]);
        const bool cz = static_cast<bool>(fixed[static_cast<std::size_t>(3 * node + 1)]);
        if (!cy && !cz)
            continue;
        Point2 r{};
        if (cy)
            r.y = residual_all[3 * node];
        if (cz)
            r.z = residual_all[3 * node + 1];
        res.reactions[node] = r;
    }
    res.tip_reaction = {};
    auto it = res.reactions.find(frame.tip_node);
    if (it != res.reactions.end())
        res.tip_reaction = it->second;
}

double yield_limit(const PlanarFrame& frame, std::size_t e) {
    return frame.elements[e].material.yield_strength;
}

std::vector<double> stresses_from_state(const PlanarFrame& frame,
                                        const std::vector<ElementGeom>& geom,
                                        const Eigen::VectorXd& q, bool nonlinear) {
    std::vector<double> out(frame.elements.size(), 0.0);
    for (std::size_t e = 0; e < geom.size(); ++e) {
        const ElementGeom& g = geom[e];
        const SectionProperties& sec = frame.elements[e].section;
        double N, Ma, Mb;
        if (nonlinear) {
            const CorotState st = corot_state(g, frame, e, q);
            N = st.N;
            Ma = st.Ma;
            Mb = st.Mb;
        } else {
            Vec6 qe;
            for (int k = 0; k < 6; ++k)
                qe[k] = q[g.dof[k]];
            const Mat6 t = transformation(g.ey, g.ez);
            const Vec6 d = t * qe;
            const Vec6 f = local_linear_stiffness(g.ea, g.ei, g.length) * d;
            N = f[3];
            Ma = f[2];
            Mb = f[5];
        }
        const double c = sec.thickness / 2.0;
        out[e] = std::abs(N) / sec.area + std::max(std::abs(Ma), std::abs(Mb)) * c / sec.second_moment;
    }
    return out;
}

} // namespace

Point2 SolveResult::displacement(int node) const {
    return {q[3 * node], q[3 * node + 1]};
}

double SolveResult::rotation(int node) const {
    return q[3 * node + 2];
}

double smallest_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
        throw Error::config("eigenvalue query needs a square matrix");
    if (m.rows() == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw Error::numeric("symmetric eigen solve failed");
    return es.eigenvalues().minCoeff();
}

SolveResult solve_linear(const PlanarFrame& frame, const LoadCase& load,
                         const SolverOptions& opts) {
    frame.validate();
    const auto geom = element_geometry(frame);
    const auto fixed = constraint_table(frame, load);
    const DofPartition part = partition(fixed);
    const int ndof = static_cast<int>(fixed.size());

    Assembled a = assemble_linear(frame, geom);
    SpMat K(ndof, ndof);
    K.setFromTriplets(a.triplets.begin(), a.triplets.end());

    Eigen::VectorXd f = external_force(frame, load, 1.0);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(ndof);
    for (std::size_t d = 0; d < fixed.size(); ++d)
        if (fixed[d])
            q[static_cast<int>(d)] = *fixed[d];

    const SpMat Kff = reduced_matrix(a.triplets, part, ndof);
    Eigen::VectorXd rhs(part.free_dofs.size());
    {
        const Eigen::VectorXd coupling = K * q;  // K_fc * q_c contribution
        for (std::size_t i = 0; i < part.free_dofs.size(); ++i) {
            const int d = part.free_dofs[i];
            rhs[static_cast<int>(i)] = f[d] - coupling[d];
        }
    }

    Eigen::SimplicialLDLT<SpMat> fact(Kff);
    if (fact.info() != Eigen::Success)
        throw Error::numeric("singular system: frame is a mechanism or under-constrained");
    {
        const Eigen::VectorXd dvec = fact.vectorD();
        const double dmax = dvec.cwiseAbs().maxCoeff();
        if (dvec.size() > 0 && (!(dvec.array().abs() > 1e-14 * dmax).all()))
            throw Error::numeric("singular system: frame is a mechanism or under-constrained");
    }
    Eigen::VectorXd qf = fact.solve(rhs);
    // One round of iterative refinement keeps the equilibrium residual tight.
    qf += fact.solve(rhs - Kff * qf);
    if (!qf.allFinite())
        throw Error::numeric("singular system: solution is not finite");

    for (std::size_t i = 0; i < part.free_dofs.size(); ++i)
        q[part.free_dofs[i]] = qf[static_cast<int>(i)];

    SolveResult res;
    res.q = q;
    res.nonlinear = false;
    res.status = SolveStatus::converged;
    const Eigen::VectorXd residual_all = K * q - f;
    fill_reactions(frame, fixed, residual_all, res);
    const auto stresses = stresses_from_state(frame, geom, q, false);
    res.max_abs_stress = stresses.empty() ? 0.0 : *std::max_element(stresses.begin(), stresses.end());
    if (opts.monitor_buckling) {
        // Tangent at the solved state, constrained like the load case.
        Assembled t = assemble_corotational(frame, geom, q);
        res.min_tangent_eigenvalue = sparse_min_eigenvalue(reduced_matrix(t.triplets, part, ndof));
    }
    double rfree = 0.0;
    for (int d : part.free_dofs)
        rfree = std::max(rfree, std::abs(residual_all[d]));
    res.final_residual = rfree;
    return res;
}

SolveResult solve_nonlinear(const PlanarFrame& frame, const LoadCase& load,
                            const SolverOptions& opts) {
    frame.validate();
    if (load.steps < 1)
        throw Error::config("load case needs at least one step");
    const auto geom = element_geometry(frame);
    const auto fixed_full = constraint_table(frame, load);
    const DofPartition part = partition(fixed_full);
    const int ndof = static_cast<int>(fixed_full.size());
    const int nfree = static_cast<int>(part.free_dofs.size());

    Eigen::VectorXd q = Eigen::VectorXd::Zero(ndof);
    SolveResult stable;  // last accepted step
    stable.q = q;
    stable.nonlinear = true;
    stable.status = SolveStatus::converged;

    for (int step = 1; step <= load.steps; ++step) {
        const double scale = static_cast<double>(step) / load.steps;
        for (std::size_t d = 0; d < fixed_full.size(); ++d)
            if (fixed_full[d])
                q[static_cast<int>(d)] = scale * (*fixed_full[d]);
        const Eigen::VectorXd fext = external_force(frame, load, scale);

        bool converged = false;
        double resid_norm = 0.0;
        double first_resid = -1.0;
        double damping = 1.0;
        Eigen::VectorXd residual_all;
        for (int it = 0; it < opts.newton_max_iter; ++it) {
            Assembled a = assemble_corotational(frame, geom, q);
            residual_all = fext - a.internal;
            Eigen::VectorXd rf(nfree);
            for (int i = 0; i < nfree; ++i)
                rf[i] = residual_all[part.free_dofs[static_cast<std::size_t>(i)]];
            resid_norm = rf.lpNorm<Eigen::Infinity>();
            if (first_resid < 0.0)
                first_resid = resid_norm;
            if (resid_norm > 1e4 * std::max(first_resid, 1.0))
                break;  // runaway
            const double force_scale =
                std::max({1.0, fext.lpNorm<Eigen::Infinity>(), a.internal.lpNorm<Eigen::Infinity>()});
            if (resid_norm <= opts.newton_tol_rel * force_scale) {
                converged = true;
                break;
            }
            SpMat Kt = reduced_matrix(a.triplets, part, ndof);
            Eigen::SimplicialLDLT<SpMat> fact(Kt);
            if (fact.info() != Eigen::Success)
                break;
            Eigen::VectorXd dq = fact.solve(rf);
            if (!dq.allFinite())
                break;
            // Damped Newton: permit bounded non-monotone steps so plateaus do
            // not trap the iteration, but shrink the damping when every trial
            // worsens the residual.
            double alpha = damping;
            Eigen::VectorXd q_best;
            double rn_best = -1.0;
            for (int ls = 0; ls < 6; ++ls) {
                Eigen::VectorXd q_try = q;
                for (int i = 0; i < nfree; ++i)
                    q_try[part.free_dofs[static_cast<std::size_t>(i)]] += alpha * dq[i];
                Assembled at = assemble_corotational(frame, geom, q_try);
                double rn = 0.0;
                for (int i = 0; i < nfree; ++i)
                    rn = std::max(rn, std::abs(fext[part.free_dofs[static_cast<std::size_t>(i)]] -
                                               at.internal[part.free_dofs[static_cast<std::size_t>(i)]]));
                if (rn_best < 0.0 || rn < rn_best) {
                    rn_best = rn;
                    q_best = q_try;
                }
                if (rn <= 2.0 * resid_norm)
                    break;
                alpha *= 0.5;
            }
            if (rn_best <= 2.0 * resid_norm) {
                q = q_best;
                damping = std::min(1.0, damping * 2.0);
            } else {
                damping *= 0.25;
                if (damping < 1e-8)
                    break;
            }
        }

        if (!converged) {
            SolveResult res = stable;
            res.status = SolveStatus::diverged;
            res.failed_step = step;
            res.final_residual = resid_norm;
            return res;
        }

        // Accepted equilibrium: check stress and stability thresholds.
        const auto stresses = stresses_from_state(frame, geom, q, true);
        double smax = 0.0;
        bool yielded = false;
        for (std::size_t e = 0; e < stresses.size(); ++e) {
            smax = std::max(smax, stresses[e]);
            if (opts.stop_on_yield && stresses[e] >= yield_limit(frame, e))
                yielded = true;
        }

        double min_eig = 0.0;
        bool buckled = false;
        if (opts.monitor_buckling) {
            Assembled a = assemble_corotational(frame, geom, q);
            min_eig = sparse_min_eigenvalue(reduced_matrix(a.triplets, part, ndof));
            buckled = min_eig <= 0.0;
        }

        if (yielded || buckled) {
            SolveResult res = stable;  // field of the last stable step
            res.status = buckled && !yielded ? SolveStatus::buckled : SolveStatus::yielded;
            if (buckled && yielded)
                res.status = SolveStatus::yielded;
            res.max_abs_stress = smax;            // violating step metrics
            res.min_tangent_eigenvalue = min_eig;
            res.failed_step = step;
            return res;
        }

        stable.q = q;
        stable.max_abs_stress = smax;
        stable.min_tangent_eigenvalue = opts.monitor_buckling ? min_eig : 0.0;
        stable.final_residual = resid_norm;
        fill_reactions(frame, fixed_full, -residual_all, stable);
    }

    return stable;
}

double tangent_min_eigenvalue(const PlanarFrame& frame, const SolveResult& state,
                              const LoadCase& load) {
    const auto geom = element_geometry(frame);
    const auto fixed = constraint_table(frame, load);
    const DofPartition part = partition(fixed);
    Assembled a = assemble_corotational(frame, geom, state.q);
    return sparse_min_eigenvalue(
        reduced_matrix(a.triplets, part, static_cast<int>(fixed.size())));
}

std::vector<double> recover_stresses(const PlanarFrame& frame, const SolveResult& state) {
    const auto geom = element_geometry(frame);
    return stresses_from_state(frame, geom, state.q, state.nonlinear);
}

Eigen::MatrixXd dense_stiffness(const PlanarFrame& frame, const Eigen::VectorXd& q) {
    const auto geom = element_geometry(frame);
    const int ndof = 3 * static_cast<int>(frame.nodes.size());
    Assembled a = assemble_corotational(frame, geom, q);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(ndof, ndof);
    for (const Triplet& t : a.triplets)
        k(t.row(), t.col()) += t.value();
    return k;
}

Eigen::VectorXd internal_forces(const PlanarFrame& frame, const Eigen::VectorXd& q) {
    const auto geom = element_geometry(frame);
    return assemble_corotational(frame, geom, q).internal;
}

double linear_strain_energy(const PlanarFrame& frame, const SolveResult& state) {
    const auto geom = element_geometry(frame);
    double energy = 0.0;
    for (std::size_t e = 0; e < geom.size(); ++e) {
        const ElementGeom& g = geom[e];
        Vec6 qe;
        for (int k = 0; k < 6; ++k)
            qe[k] = state.q[g.dof[k]];
        const Mat6 t = transformation(g.ey, g.ez);
        const Vec6 d = t * qe;
        energy += 0.5 * d.dot(local_linear_stiffness(g.ea, g.ei, g.length) * d);
    }
    return energy;
}

} // namespace finray
