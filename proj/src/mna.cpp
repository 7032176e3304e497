#include "circadj/mna.hpp"

#include "circadj/errors.hpp"

#include <cmath>

namespace circadj {

int DofMap::node(std::string_view name) const {
    if (name == kGround) return -1;
    auto it = node_index.find(std::string(name));
    if (it == node_index.end()) throw InputError("unknown node '" + std::string(name) + "'");
    return it->second;
}

int DofMap::branch(std::string_view element) const {
    auto it = branch_index.find(std::string(element));
    if (it == branch_index.end()) throw InputError("element '" + std::string(element) + "' has no branch current");
    return it->second;
}

DofMap assign_dofs(const Netlist& netlist) {
    DofMap d;
    for (const auto& node : netlist.nodes) {
        if (node == kGround) continue;
        d.node_index[node] = d.n_dofs++;
        d.labels.push_back("v(" + node + ")");
    }
    for (const auto& e : netlist.elements) {
        if (e.kind == ElementKind::VoltageSource || e.kind == ElementKind::Inductor) {
            d.branch_index[e.name] = d.n_dofs++;
            d.labels.push_back("i(" + e.name + ")");
        }
    }
    return d;
}

namespace {

/// +w on (a,a),(b,b), -w on (a,b),(b,a); ground rows/cols dropped.
void two_terminal(std::vector<StampEntry>& out, int a, int b, double w) {
    if (a >= 0) out.push_back({a, a, w});
    if (b >= 0) out.push_back({b, b, w});
    if (a >= 0 && b >= 0) {
        out.push_back({a, b, -w});
        out.push_back({b, a, -w});
    }
}

CompactParamStamp compact_param_stamp(const Element& e, const DofMap& dofs) {
    CompactParamStamp s;
    const int a = dofs.node(e.nodes[0]);
    const int b = dofs.node(e.nodes[1]);
    switch (e.kind) {
        case ElementKind::Resistor: two_terminal(s.dJg, a, b, -1.0 / (e.value * e.value)); break;
        case ElementKind::Capacitor: two_terminal(s.dJc, a, b, 1.0); break;
        case ElementKind::Inductor: {
            const int k = dofs.branch(e.name);
            s.dJc.push_back({k, k, -1.0});
            break;
        }
        default: throw InputError(e.name + " is not a differentiable parameter");
    }
    return s;
}

SparseMatrix entries_to_sparse(int n, const std::vector<StampEntry>& entries) {
    std::vector<Eigen::Triplet<double>> t;
    for (const auto& e : entries) t.emplace_back(e.row, e.col, e.value);
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

}  // namespace

ParamStamp param_stamps(const Netlist& netlist, const DofMap& dofs, const Parameter& p) {
    if (p.element >= netlist.elements.size()) throw InputError("unknown parameter id " + std::to_string(p.id));
    auto c = compact_param_stamp(netlist.elements[p.element], dofs);
    return {entries_to_sparse(dofs.n_dofs, c.dJc), entries_to_sparse(dofs.n_dofs, c.dJg)};
}

StampedSystem::StampedSystem(const Netlist& netlist, const DofMap& dofs) : dofs_(dofs), params_(netlist.params) {
    const int n = dofs_.n_dofs;
    std::vector<StampEntry> jc, jg;
    std::vector<std::pair<int, int>> extra;  // device positions that start at zero

    for (const auto& e : netlist.elements) {
        const int a = dofs_.node(e.nodes[0]);
        const int b = dofs_.node(e.nodes[1]);
        switch (e.kind) {
            case ElementKind::Resistor: two_terminal(jg, a, b, 1.0 / e.value); break;
            case ElementKind::Capacitor: two_terminal(jc, a, b, e.value); break;
            case ElementKind::Inductor:
            case ElementKind::VoltageSource: {
                const int k = dofs_.branch(e.name);
                if (a >= 0) {
                    jg.push_back({a, k, 1.0});
                    jg.push_back({k, a, 1.0});
                }
                if (b >= 0) {
                    jg.push_back({b, k, -1.0});
                    jg.push_back({k, b, -1.0});
                }
                if (e.kind == ElementKind::Inductor) {
                    jc.push_back({k, k, -e.value});
                } else {
                    sources_.push_back({k, -1, e.source});
                }
                break;
            }
            case ElementKind::CurrentSource:
                // positive current flows from the first node through the source to the second
                sources_.push_back({b, a, e.source});
                break;
            case ElementKind::Diode:
            case ElementKind::Switch: {
                if (a >= 0) extra.emplace_back(a, a);
                if (b >= 0) extra.emplace_back(b, b);
                if (a >= 0 && b >= 0) {
                    extra.emplace_back(a, b);
                    extra.emplace_back(b, a);
                }
                break;
            }
        }
    }

    std::vector<std::pair<int, int>> entries = extra;
    for (const auto& s : jc) entries.emplace_back(s.row, s.col);
    for (const auto& s : jg) entries.emplace_back(s.row, s.col);
    // diagonal always present so step matrices have a full diagonal slot
    for (int i = 0; i < n; ++i) entries.emplace_back(i, i);
    pattern_ = SparsityPattern(n, std::move(entries));
    jc_.assign(static_cast<std::size_t>(pattern_.nnz()), 0.0);
    jg_.assign(static_cast<std::size_t>(pattern_.nnz()), 0.0);
    for (const auto& s : jc) jc_[static_cast<std::size_t>(pattern_.slot(s.row, s.col))] += s.value;
    for (const auto& s : jg) jg_[static_cast<std::size_t>(pattern_.slot(s.row, s.col))] += s.value;

    for (const auto& e : netlist.elements) {
        const int a = dofs_.node(e.nodes[0]);
        const int b = dofs_.node(e.nodes[1]);
        if (e.kind == ElementKind::Diode) diodes_.push_back({device_slots(a, b), e.diode});
        if (e.kind == ElementKind::Switch) switches_.push_back({device_slots(a, b), e.sw});
    }

    for (const auto& p : params_) param_stamps_.push_back(compact_param_stamp(netlist.elements[p.element], dofs_));
}

StampedSystem::DeviceSlots StampedSystem::device_slots(int a, int b) const {
    DeviceSlots s;
    s.a = a;
    s.b = b;
    if (a >= 0) s.aa = pattern_.slot(a, a);
    if (b >= 0) s.bb = pattern_.slot(b, b);
    if (a >= 0 && b >= 0) {
        s.ab = pattern_.slot(a, b);
        s.ba = pattern_.slot(b, a);
    }
    return s;
}

Vector StampedSystem::source(double t) const {
    Vector is = Vector::Zero(size());
    for (const auto& s : sources_) {
        const double v = evaluate(s.wave, t);
        if (s.row_pos >= 0) is[s.row_pos] += v;
        if (s.row_neg >= 0) is[s.row_neg] -= v;
    }
    return is;
}

DiodeEval eval_diode(const DiodeModel& m, double v) {
    const double nvt = m.emission * m.thermal_voltage;
    const double x = v / nvt;
    constexpr double clamp = StampedSystem::kDiodeExponentClamp;
    if (x > clamp) {
        const double e = std::exp(clamp);
        return {m.saturation_current * (e * (1.0 + (x - clamp)) - 1.0), m.saturation_current * e / nvt};
    }
    const double e = std::exp(x);
    return {m.saturation_current * (e - 1.0), m.saturation_current * e / nvt};
}

double switch_conductance(const SwitchModel& m, double t) {
    const double s = pwm_level(m.schedule, t);
    const double g_off = 1.0 / m.r_off;
    const double g_on = 1.0 / m.r_on;
    return g_off + s * (g_on - g_off);
}

void StampedSystem::eval_nonlinear(const Vector& phi, double t, Vector& current, Values& jacobian) const {
    current.setZero(size());
    jacobian.assign(static_cast<std::size_t>(pattern_.nnz()), 0.0);
    auto stamp = [&](const DeviceSlots& s, double i, double g) {
        if (s.a >= 0) current[s.a] += i;
        if (s.b >= 0) current[s.b] -= i;
        if (s.aa >= 0) jacobian[static_cast<std::size_t>(s.aa)] += g;
        if (s.bb >= 0) jacobian[static_cast<std::size_t>(s.bb)] += g;
        if (s.ab >= 0) jacobian[static_cast<std::size_t>(s.ab)] -= g;
        if (s.ba >= 0) jacobian[static_cast<std::size_t>(s.ba)] -= g;
    };
    auto voltage = [&](const DeviceSlots& s) {
        return (s.a >= 0 ? phi[s.a] : 0.0) - (s.b >= 0 ? phi[s.b] : 0.0);
    };
    for (const auto& d : diodes_) {
        auto ev = eval_diode(d.model, voltage(d.at));
        stamp(d.at, ev.current, ev.conductance);
    }
    for (const auto& sw : switches_) {
        const double g = switch_conductance(sw.model, t);
        stamp(sw.at, g * voltage(sw.at), g);
    }
}

Values StampedSystem::jacobian_g(const Vector& phi, double t) const {
    Vector current;
    Values jac;
    eval_nonlinear(phi, t, current, jac);
    for (std::size_t s = 0; s < jac.size(); ++s) jac[s] += jg_[s];
    return jac;
}

Vector StampedSystem::static_residual(const Vector& phi, double t) const {
    Vector current;
    Values jac;
    eval_nonlinear(phi, t, current, jac);
    Vector g;
    multiply(pattern_, jg_, phi, g);
    return g + current - source(t);
}

Vector StampedSystem::residual(const Vector& phi, const Vector& phi_dot, double t) const {
    Vector c;
    multiply(pattern_, jc_, phi_dot, c);
    return c + static_residual(phi, t);
}

const CompactParamStamp& StampedSystem::compact_stamp(std::size_t id) const {
    if (id >= param_stamps_.size()) throw InputError("unknown parameter id " + std::to_string(id));
    return param_stamps_[id];
}

ParamStamp StampedSystem::param_stamp(std::size_t id) const {
    const auto& c = compact_stamp(id);
    return {entries_to_sparse(size(), c.dJc), entries_to_sparse(size(), c.dJg)};
}

StampedSystem stamp_linear(const Netlist& netlist, const DofMap& dofs) { return StampedSystem(netlist, dofs); }

}  // namespace circadj
