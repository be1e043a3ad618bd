#ifndef FINRAY_INSERTION_HPP
#define FINRAY_INSERTION_HPP

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finray/characterize.hpp"
#include "finray/geometry.hpp"

namespace finray {

enum class ConnectorFit { press, running, transition };
enum class GlandOrientation { straight, right_angle };
enum class LockingFeature { none, clip, lever };

ConnectorFit fit_from_string(const std::string& s);
std::string to_string(ConnectorFit f);
GlandOrientation gland_from_string(const std::string& s);
std::string to_string(GlandOrientation g);
LockingFeature locking_from_string(const std::string& s);
std::string to_string(LockingFeature l);

/// Connector properties that shape the search strategy.
struct ConnectorTraits {
    ConnectorFit fit = ConnectorFit::running;
    double exposed_after_insert = 12.0; // mm of plug left gripped above the socket
    GlandOrientation gland = GlandOrientation::straight;
    double pin_height = -5.0;  // mm; negative = recessed below the opening plane
    LockingFeature locking = LockingFeature::none; // recorded, no force model

    void validate() const;
};

/// Default clearance per fit class, used when the scenario does not pin one.
double default_clearance(ConnectorFit fit);

/// Lumped rotational behaviour of the cable head inside the grip.
struct GripRotation {
    double play_deg = 2.0;       // free rotation before the grip resists
    double k_play = 0.05;        // N*mm/deg inside the play band
    double k_hard = 15.0;        // N*mm/deg beyond the play band
};

struct InsertionScenario {
    double plug_width = 10.0;    // mm
    double plug_height = 20.0;   // mm
    double socket_depth = 8.0;   // mm
    double clearance = 0.2;      // mm; opening = plug_width + clearance
    double friction_mu = 0.3;    // plug on socket
    StiffnessMatrix grip;        // fingertip compliance at the grip point
    GripRotation grip_rotation;
    std::optional<ViscoelasticFit> visco;
    Point2 misalignment{0.0, 0.0};  // believed-minus-true socket position (mm)
    double tilt = 10.0;             // deg, approach tilt of the plug
    ConnectorTraits traits;
    double contact_stiffness = 1000.0; // N/mm penalty
    double force_limit = 60.0;         // N per contact
    double x_rotation_tolerance = 7.0; // mm, lumped free-rotation window along x
    double lip_radius = 0.4;           // mm, lead-in rounding of the opening edges

    void validate() const;
};

struct StrategyParams {
    double step = 0.1;                // mm commanded motion per increment
    double approach_height = 12.0;    // mm above the surface at phase start
    double first_contact_offset = 1.5; // corner lands this far outside the near lip
    double slide_overshoot = 2.0;      // commanded corner travel past the far lip
    double preload = 1.1;             // commanded depth below first touch
    double seat_overtravel = 0.8;     // commanded depth past the socket floor
    double untilt_depth = 2.5;        // commanded depth while untilting (mm)
    int stall_steps = 25;             // no-progress steps before the jam check
    double approach_speed = 250.0;    // mm/s, used for the viscous estimate only

    void validate() const;
};

enum class InsertOutcome { success, jammed, missed, overforce };
std::string to_string(InsertOutcome o);

enum class Phase { approach, slide_x, slide_y, insert_z };
std::string to_string(Phase p);

struct PlugPose {
    double y = 0.0;      // bottom-center position (mm)
    double z = 0.0;
    double theta = 0.0;  // rad, CCW
};

/// Resolved penalty contact, for inspection and invariants.
struct ContactForce {
    Point2 point;
    Point2 normal;   // unit, direction of the normal force on the plug
    double fn = 0.0; // N, >= 0
    double ft = 0.0; // N along the contact tangent
};

struct TraceSample {
    int step = 0;
    Phase phase = Phase::approach;
    PlugPose command;
    PlugPose plug;
    std::vector<ContactForce> contacts;
    double contact_fy = 0.0;  // N, summed over contacts
    double contact_fz = 0.0;
    double contact_fx = 0.0;  // out of plane, identically zero in this model
    double depth = 0.0;       // mm of insertion
};

struct SearchTrace {
    std::vector<Phase> phases;         // declared phase order
    std::vector<TraceSample> samples;
    InsertOutcome outcome = InsertOutcome::missed;
    double insert_depth = 0.0;  // mm at the end
    int outcome_step = -1;
    double max_contact_force = 0.0;  // N, largest single-contact magnitude

    void validate() const;
};

/// Single contact point for the wedging analysis; normal points into the plug.
struct Contact {
    Point2 point;   // mm, socket frame
    Point2 normal;  // unit
};

struct Wrench {
    double fy = 0.0;
    double fz = 0.0;
    double tau = 0.0;  // N*mm about the origin
};

/// Quasi-static simulation of the three-phase mechanical search insertion.
SearchTrace simulate_insert(const InsertionScenario& scenario, const StrategyParams& strategy);

/// Grip spring wrench on the plug for a commanded pose.
Wrench grip_reaction(const InsertionScenario& scenario, const PlugPose& pose,
                     const PlugPose& command);

enum class Axis { x, y };
std::string to_string(Axis a);

struct ToleranceWindow {
    Axis axis = Axis::y;
    double min_offset = 0.0;  // mm
    double max_offset = 0.0;
    double window = 0.0;      // max - min
    InsertOutcome limit_low = InsertOutcome::missed;   // first failure below
    InsertOutcome limit_high = InsertOutcome::missed;  // first failure above
};

/// Scans misalignment outward in +/- step increments until the first failure
/// on each side. Every success is re-simulated once as a determinism check.
ToleranceWindow tolerance_window(const InsertionScenario& scenario, Axis axis, double step,
                                 const StrategyParams& strategy);

/// Added transverse contact force at an approach speed: b * speed.
double viscous_force_estimate(const ViscoelasticFit& fit, double speed);

/// True iff the applied wrench can be balanced inside the two-point wedging
/// cone (classical rectangular peg condition with friction mu).
bool jamming_check(std::span<const Contact> contacts, double mu, const Wrench& applied);

} // namespace finray

#endif
