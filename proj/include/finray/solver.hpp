#ifndef FINRAY_SOLVER_HPP
#define FINRAY_SOLVER_HPP

#include <map>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "finray/geometry.hpp"

namespace finray {

/// Per-node translation prescription; either component may be left free.
struct NodeConstraint {
    std::optional<double> dy;
    std::optional<double> dz;
};

struct LoadCase {
    std::map<int, NodeConstraint> prescribed;  // node -> prescribed translations (mm)
    std::map<int, Point2> forces;              // node -> applied force (N)
    int steps = 1;                             // load increments (nonlinear path)
};

enum class SolveStatus { converged, buckled, yielded, diverged };

/// Quasi-static solution state. For early stops (buckled/yielded) the nodal
/// field holds the last stable step while max_abs_stress and
/// min_tangent_eigenvalue report the violating step that triggered the stop.
struct SolveResult {
    Eigen::VectorXd q;                  // 3 dof per node: uy, uz, rot
    std::map<int, Point2> reactions;    // per constrained node (N)
    Point2 tip_reaction;                // reaction at the frame tip node (N)
    double max_abs_stress = 0.0;        // MPa
    double min_tangent_eigenvalue = 0.0; // N/mm
    SolveStatus status = SolveStatus::converged;
    bool nonlinear = false;
    int failed_step = -1;               // diagnostics for diverged/stopped runs
    double final_residual = 0.0;

    Point2 displacement(int node) const;
    double rotation(int node) const;
};

struct SolverOptions {
    double newton_tol_rel = 1e-8;  // residual tolerance relative to force scale
    int newton_max_iter = 50;
    bool monitor_buckling = true;  // track tangent eigenvalue, stop when <= 0
    bool stop_on_yield = true;     // stop when max fiber stress reaches yield
};

/// Small-displacement Euler-Bernoulli frame solution (3 dof per node).
SolveResult solve_linear(const PlanarFrame& frame, const LoadCase& load,
                         const SolverOptions& opts = {});

/// Corotational large-rotation solution with incremental loading and Newton
/// iterations per step.
SolveResult solve_nonlinear(const PlanarFrame& frame, const LoadCase& load,
                            const SolverOptions& opts = {});

/// Smallest eigenvalue of the constrained tangent stiffness at a solved state.
double tangent_min_eigenvalue(const PlanarFrame& frame, const SolveResult& state,
                              const LoadCase& load);

/// Max fiber stress per element: |N/A| + |M| (t/2) / I, max over both ends.
std::vector<double> recover_stresses(const PlanarFrame& frame, const SolveResult& state);

/// Stored elastic energy of a linear solution, element by element.
double linear_strain_energy(const PlanarFrame& frame, const SolveResult& state);

/// Smallest eigenvalue of a dense symmetric matrix.
double smallest_symmetric_eigenvalue(const Eigen::MatrixXd& m);

/// Unconstrained stiffness (q = 0: linear) or corotational tangent at q,
/// assembled dense. Intended for diagnostics and verification.
Eigen::MatrixXd dense_stiffness(const PlanarFrame& frame, const Eigen::VectorXd& q);

/// Corotational internal nodal force vector at q (3 dof per node).
Eigen::VectorXd internal_forces(const PlanarFrame& frame, const Eigen::VectorXd& q);

} // namespace finray

#endif
