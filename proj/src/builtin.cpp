#include "circadj/netlist.hpp"

#include "circadj/errors.hpp"

#include <sstream>

namespace circadj {

namespace {

// Component values below are this project's defaults, not measured data.

std::string rectifier_text() {
    return R"(* Half-wave rectifier: sinusoidal source, diode, load resistor, smoothing capacitor.
.title half_wave_rectifier
V1 in 0 SIN(10 50 0)
D1 in out IS=1e-12 N=1 VT=0.02585
R1 out 0 100
C1 out 0 1m
.tran 1u 0.1
.sens 0.08 0.1 v(out)
.end
)";
}

struct HalfBridge {
    const char* phase;   // "u", "v", "w"
    double high_delay;   // s, start of the high-side on window
};

std::string b6_text(int stages) {
    constexpr double period = 20e-6;
    constexpr double dead = 20e-9;
    constexpr double ramp = 10e-9;
    const HalfBridge bridges[] = {{"u", 0.0}, {"v", 8.8e-6}, {"w", 14.4e-6}};

    std::ostringstream os;
    os.precision(17);
    os << "* B6 bridge motor supply with synthetic parasitic RLC ladders (" << stages << " stage(s) per site).\n";
    os << ".title b6_bridge_reduced\n";
    os << "V_dc p_src 0 DC 12.5\n";
    os << "R_dc p_src p 10m\n";
    for (const auto& b : bridges) {
        const std::string x = b.phase;
        const std::string hd = x + "h_d";
        const std::string ls = x + "l_s";
        // rail interconnect into the high-side drain
        os << "L_p-" << x << "h p " << hd << " 50n\n";
        // complementary switches with dead time
        const double high_delay = b.high_delay;
        const double low_delay = b.high_delay + 0.5 * period + dead;
        const double low_duty = (0.5 * period - 2.0 * dead) / period;
        os << "S_" << x << "h " << hd << ' ' << x << " RON=10m ROFF=1meg PERIOD=" << period
           << " DUTY=0.5 DELAY=" << high_delay << " RAMP=" << ramp << "\n";
        os << "S_" << x << "l " << x << ' ' << ls << " RON=10m ROFF=1meg PERIOD=" << period
           << " DUTY=" << low_duty << " DELAY=" << low_delay << " RAMP=" << ramp << "\n";
        os << "C_DS_" << x << "h " << hd << ' ' << x << " 2.2n\n";
        os << "C_DS_" << x << "l " << x << ' ' << ls << " 2.2n\n";
        os << "L_" << x << "l-gnd " << ls << " 0 20n\n";
        // motor phase winding to the star point
        os << "L_mot_" << x << ' ' << x << " m_" << x << " 100u\n";
        os << "R_mot_" << x << " m_" << x << " star 10\n";
    }
    // interconnect between neighbouring high-side drains; the series
    // resistance keeps the inductor loop through the rail solvable at DC
    os << "R_uh-vh3 uh_d uv_i 10m\n";
    os << "L_uh-vh3 uv_i vh_d 100n\n";
    os << "R_vh-wh3 vh_d vw_i 10m\n";
    os << "L_vh-wh3 vw_i wh_d 100n\n";

    const char* sites[] = {"uh_d", "vh_d", "wh_d", "u", "v", "w"};
    for (const char* site : sites) {
        std::string prev = site;
        for (int j = 1; j <= stages; ++j) {
            const std::string tag = std::string("zp_") + site + "_" + std::to_string(j);
            os << "R_" << tag << ' ' << prev << ' ' << tag << "a 2\n";
            os << "L_" << tag << ' ' << tag << "a " << tag << "b 10n\n";
            os << "C_" << tag << ' ' << tag << "b 0 100p\n";
            prev = tag + "b";
        }
    }
    os << ".tran 1n 19.4u\n";
    os << ".sens 18.85u 19.4u v(uh_d,u)\n";
    os << ".end\n";
    return os.str();
}

}  // namespace

std::string builtin_netlist_text(std::string_view name, const BuiltinOptions& options) {
    if (name == "half_wave_rectifier") return rectifier_text();
    if (name == "b6_bridge_reduced") {
        if (options.ladder_stages < 0) throw InputError("ladder_stages must be >= 0");
        return b6_text(options.ladder_stages);
    }
    throw InputError("unknown builtin circuit '" + std::string(name) + "'");
}

Netlist builtin_circuit(std::string_view name, const BuiltinOptions& options) {
    return parse_netlist(builtin_netlist_text(name, options));
}

}  // namespace circadj
