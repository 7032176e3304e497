#pragma once

#include "circadj/linalg.hpp"
#include "circadj/netlist.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace circadj {

/// Row assignment: non-ground nodes first (netlist order), then one branch
/// current per voltage source and inductor (element order).
struct DofMap {
    std::map<std::string, int> node_index;
    std::map<std::string, int> branch_index;
    std::vector<std::string> labels;  // "v(node)" or "i(element)"
    int n_dofs = 0;

    /// Row of `node`, -1 for ground. Throws InputError for unknown nodes.
    [[nodiscard]] int node(std::string_view name) const;
    [[nodiscard]] int branch(std::string_view element) const;
};

[[nodiscard]] DofMap assign_dofs(const Netlist& netlist);

/// dJ_C/dp and dJ_G/dp of one parameter.
struct ParamStamp {
    SparseMatrix dJc;
    SparseMatrix dJg;
};

/// Parameter derivative stamp in compact form, used on hot paths.
struct StampEntry {
    int row = 0;
    int col = 0;
    double value = 0.0;
};
struct CompactParamStamp {
    std::vector<StampEntry> dJc;
    std::vector<StampEntry> dJg;
};

[[nodiscard]] ParamStamp param_stamps(const Netlist& netlist, const DofMap& dofs, const Parameter& p);

/// Assembled DAE  J_C phi' + J_G phi + i_nl(phi, t) - i_s(t) = 0.
/// Immutable after construction; all const methods are safe to call
/// concurrently.
class StampedSystem {
public:
    StampedSystem(const Netlist& netlist, const DofMap& dofs);

    [[nodiscard]] int size() const { return dofs_.n_dofs; }
    [[nodiscard]] const DofMap& dofs() const { return dofs_; }
    [[nodiscard]] const SparsityPattern& pattern() const { return pattern_; }
    [[nodiscard]] const Values& jc_values() const { return jc_; }
    [[nodiscard]] const Values& jg_values() const { return jg_; }
    [[nodiscard]] SparseMatrix jc() const { return to_sparse(pattern_, jc_); }
    [[nodiscard]] SparseMatrix jg_linear() const { return to_sparse(pattern_, jg_); }

    [[nodiscard]] Vector source(double t) const;

    /// Nonlinear device currents (leaving each node) and their Jacobian
    /// d i_nl / d phi on pattern(). Switches enter here because their
    /// conductance depends on t.
    void eval_nonlinear(const Vector& phi, double t, Vector& current, Values& jacobian) const;

    /// J_G(phi, t) = linear conductances + d i_nl / d phi, on pattern().
    [[nodiscard]] Values jacobian_g(const Vector& phi, double t) const;

    /// J_G phi + i_nl(phi, t) - i_s(t)
    [[nodiscard]] Vector static_residual(const Vector& phi, double t) const;
    /// J_C phi' + static_residual(phi, t)
    [[nodiscard]] Vector residual(const Vector& phi, const Vector& phi_dot, double t) const;

    /// True when some device current is nonlinear in phi (diodes).
    [[nodiscard]] bool nonlinear_in_state() const { return !diodes_.empty(); }
    [[nodiscard]] bool has_time_varying_devices() const { return !switches_.empty(); }

    [[nodiscard]] const std::vector<Parameter>& params() const { return params_; }
    [[nodiscard]] const CompactParamStamp& compact_stamp(std::size_t id) const;
    [[nodiscard]] ParamStamp param_stamp(std::size_t id) const;

    /// Beyond v/(n V_T) = 40 the Shockley law continues linearly.
    static constexpr double kDiodeExponentClamp = 40.0;

private:
    struct DeviceSlots {
        int a = -1;
        int b = -1;
        int aa = -1, bb = -1, ab = -1, ba = -1;
    };
    struct Diode {
        DeviceSlots at;
        DiodeModel model;
    };
    struct Switch {
        DeviceSlots at;
        SwitchModel model;
    };
    struct Source {
        int row_pos = -1;  // row receiving +value
        int row_neg = -1;  // row receiving -value
        Waveform wave;
    };

    DeviceSlots device_slots(int a, int b) const;

    DofMap dofs_;
    SparsityPattern pattern_;
    Values jc_;
    Values jg_;
    std::vector<Source> sources_;
    std::vector<Diode> diodes_;
    std::vector<Switch> switches_;
    std::vector<Parameter> params_;
    std::vector<CompactParamStamp> param_stamps_;
};

/// Builds the StampedSystem for an existing DoF map.
[[nodiscard]] StampedSystem stamp_linear(const Netlist& netlist, const DofMap& dofs);

/// Shockley diode current and conductance with exponent clamping.
struct DiodeEval {
    double current;
    double conductance;
};
[[nodiscard]] DiodeEval eval_diode(const DiodeModel& m, double v);

/// Switch conductance at time t.
[[nodiscard]] double switch_conductance(const SwitchModel& m, double t);

}  // namespace circadj
