#pragma once

#include "circadj/waveform.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace circadj {

inline constexpr std::string_view kGround = "0";

enum class ElementKind { Resistor, Inductor, Capacitor, VoltageSource, CurrentSource, Diode, Switch };

[[nodiscard]] std::string_view to_string(ElementKind kind);

/// Shockley diode. Current flows from the first node (anode) to the second.
struct DiodeModel {
    double saturation_current = 1e-12;  // A
    double emission = 1.0;
    double thermal_voltage = 0.02585;  // V
    bool operator==(const DiodeModel&) const = default;
};

/// Time-scheduled switch. The conductance follows `schedule` (a unit PWM
/// train whose rise/fall are the ramp times) between 1/r_off and 1/r_on.
struct SwitchModel {
    double r_on = 1e-2;   // Ohm
    double r_off = 1e6;   // Ohm
    PwmWave schedule{};
    bool operator==(const SwitchModel&) const = default;
};

struct Element {
    std::string name;
    ElementKind kind = ElementKind::Resistor;
    std::array<std::string, 2> nodes;
    /// Nominal value in SI units for R (Ohm), L (H), C (F); unused otherwise.
    double value = 0.0;
    Waveform source = DcWave{};
    DiodeModel diode{};
    SwitchModel sw{};

    [[nodiscard]] bool is_passive() const {
        return kind == ElementKind::Resistor || kind == ElementKind::Inductor ||
               kind == ElementKind::Capacitor;
    }
    bool operator==(const Element&) const = default;
};

/// A differentiable circuit parameter: the value of one R, L or C element.
struct Parameter {
    std::size_t id = 0;
    std::string name;
    std::size_t element = 0;  // index into Netlist::elements
    ElementKind kind = ElementKind::Resistor;
    double nominal = 0.0;
    bool operator==(const Parameter&) const = default;
};

struct TranDirective {
    double dt = 0.0;
    double t_end = 0.0;
    bool operator==(const TranDirective&) const = default;
};

struct SensDirective {
    double t_start = 0.0;
    double t_end = 0.0;
    std::string qoi;  // e.g. "v(out)", "v(a,b)", "i(L1)"
    bool operator==(const SensDirective&) const = default;
};

struct Netlist {
    std::string title;
    std::vector<std::string> nodes;  // nodes[0] == "0"
    std::vector<Element> elements;
    std::vector<Parameter> params;
    /// Element names given in a `.params` directive; empty means "all R/L/C".
    std::vector<std::string> param_filter;
    std::optional<TranDirective> tran;
    std::optional<SensDirective> sens;

    /// Case-insensitive lookup; returns nullptr if absent.
    [[nodiscard]] const Element* find_element(std::string_view name) const;
    [[nodiscard]] std::size_t element_index(std::string_view name) const;
    [[nodiscard]] const Parameter& param(std::string_view name) const;

    bool operator==(const Netlist&) const = default;
};

/// Parses the line-oriented netlist format described in GRAMMAR.md.
/// Throws InputError with the offending line/column.
[[nodiscard]] Netlist parse_netlist(std::string_view text);

/// Reads and parses a netlist file, or expands `builtin:<name>[:<stages>]`.
[[nodiscard]] Netlist load_netlist(const std::string& path_or_builtin);

/// Canonical text form; parse_netlist(serialize(n)) == n.
[[nodiscard]] std::string serialize(const Netlist& netlist);

/// Re-checks every structural invariant and recomputes `params`.
/// Used after programmatic edits (e.g. parameter perturbation).
void finalize(Netlist& netlist);

/// Copy of `netlist` with one R/L/C element value replaced.
[[nodiscard]] Netlist with_element_value(const Netlist& netlist, std::size_t element, double value);

/// Parses an SI-suffixed number ("10n", "2.2u", "1meg", "4.7kOhm").
[[nodiscard]] std::optional<double> parse_si_number(std::string_view token);

// --- builtin fixtures ------------------------------------------------------

struct BuiltinOptions {
    /// RLC ladder stages per parasitic position (B6 bridge only).
    int ladder_stages = 2;
};

/// Text of a builtin circuit: "half_wave_rectifier" or "b6_bridge_reduced".
[[nodiscard]] std::string builtin_netlist_text(std::string_view name, const BuiltinOptions& options = {});

[[nodiscard]] Netlist builtin_circuit(std::string_view name, const BuiltinOptions& options = {});

}  // namespace circadj
