#include "bandwagon/core_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bandwagon/io.hpp"

namespace bandwagon {

TruePreference::TruePreference(double p) : p_(p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("true preference must lie in (0,1), got " + format_number(p));
    }
}

double next_rating_probability(const TruePreference& p, const ProcessState& state, double lambda_n) {
    if (state.n == 0 && lambda_n != 1.0) {
        throw std::invalid_argument("the first rating must use lambda = 1");
    }
    return next_rating_probability(p.value(), state, lambda_n);
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

LambdaSchedule LambdaSchedule::constant(double c) {
    require(c >= 0.0 && c <= 1.0, "const: c must be in [0,1]");
    return LambdaSchedule(Constant{c});
}

LambdaSchedule LambdaSchedule::geometric_affine(double a, double b) {
    require(a >= 0.0 && a <= 1.0, "geom-affine: a must be in [0,1]");
    require(b > 0.0 && b < 1.0, "geom-affine: b must be in (0,1)");
    return LambdaSchedule(GeometricAffine{a, b});
}

LambdaSchedule LambdaSchedule::geometric(double c) {
    require(c > 0.0 && c <= 1.0, "geom: c must be in (0,1]");
    return LambdaSchedule(Geometric{c});
}

LambdaSchedule LambdaSchedule::power_law(double q) {
    require(q >= 0.0 && std::isfinite(q), "power: q must be >= 0");
    return LambdaSchedule(PowerLaw{q});
}

LambdaSchedule LambdaSchedule::explicit_values(std::vector<double> values) {
    require(!values.empty(), "explicit: list must be nonempty");
    require(values.front() == 1.0, "explicit: lambda_1 must equal 1");
    for (std::size_t i = 1; i < values.size(); ++i) {
        require(values[i] >= 0.0 && values[i] <= 1.0, "explicit: values must be in [0,1]");
        require(values[i] <= values[i - 1], "explicit: values must be nonincreasing");
    }
    return LambdaSchedule(Explicit{std::move(values)});
}

LambdaSchedule LambdaSchedule::with_floor(double tau) const {
    require(tau > 0.0 && tau <= 1.0, "clip threshold must be in (0,1]");
    LambdaSchedule out = *this;
    out.floor_ = std::max(floor_, tau);
    return out;
}

std::size_t LambdaSchedule::horizon() const noexcept {
    if (const auto* e = std::get_if<Explicit>(&kind_)) return e->values.size();
    return std::numeric_limits<std::size_t>::max();
}

double LambdaSchedule::raw_at(std::size_t i) const {
    const auto k = static_cast<double>(i - 1);
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return i == 1 ? 1.0 : s.c;
            } else if constexpr (std::is_same_v<T, GeometricAffine>) {
                return s.a + (1.0 - s.a) * std::pow(s.b, k);
            } else if constexpr (std::is_same_v<T, Geometric>) {
                return std::pow(s.c, k);
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                return std::pow(static_cast<double>(i), -s.q);
            } else {
                return s.values[i - 1];
            }
        },
        kind_);
}

double LambdaSchedule::at(std::size_t i) const {
    if (i == 0) throw std::out_of_range("lambda index is 1-based");
    if (i > horizon()) {
        throw std::out_of_range("lambda index " + std::to_string(i) + " beyond explicit schedule of length " +
                                std::to_string(horizon()) + "; extrapolate with a fitted curve");
    }
    // a + (1-a) b^0 can round away from 1 only through a; pin the first entry.
    if (i == 1) return 1.0;
    return std::max(raw_at(i), floor_);
}

std::vector<double> LambdaSchedule::table(std::size_t n) const {
    std::vector<double> out(n);
    for (std::size_t i = 1; i <= n; ++i) out[i - 1] = at(i);
    return out;
}

namespace {

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument("bad number in schedule: '" + std::string(s) + "'");
    }
    return v;
}

std::vector<double> parse_list(std::string_view s) {
    std::vector<double> out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(parse_double(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace

LambdaSchedule parse_schedule(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw std::invalid_argument("schedule must look like <kind>:<params>, got '" + std::string(text) + "'");
    }
    const auto kind = text.substr(0, colon);
    const auto args = parse_list(text.substr(colon + 1));
    auto expect = [&](std::size_t count) {
        if (args.size() != count) {
            throw std::invalid_argument("schedule '" + std::string(kind) + "' takes " + std::to_string(count) +
                                        " parameter(s)");
        }
    };
    if (kind == "const") {
        expect(1);
        return LambdaSchedule::constant(args[0]);
    }
    if (kind == "geom-affine") {
        expect(2);
        return LambdaSchedule::geometric_affine(args[0], args[1]);
    }
    if (kind == "geom") {
        expect(1);
        return LambdaSchedule::geometric(args[0]);
    }
    if (kind == "power") {
        expect(1);
        return LambdaSchedule::power_law(args[0]);
    }
    if (kind == "explicit") return LambdaSchedule::explicit_values(args);
    throw std::invalid_argument("unknown schedule kind '" + std::string(kind) + "'");
}

std::string format_schedule(const LambdaSchedule& schedule) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LambdaSchedule::Constant>) {
                return "const:" + format_number(s.c);
            } else if constexpr (std::is_same_v<T, LambdaSchedule::GeometricAffine>) {
                return "geom-affine:" + format_number(s.a) + "," + format_number(s.b);
            } else if constexpr (std::is_same_v<T, LambdaSchedule::Geometric>) {
                return "geom:" + format_number(s.c);
            } else if constexpr (std::is_same_v<T, LambdaSchedule::PowerLaw>) {
                return "power:" + format_number(s.q);
            } else {
                std::string out = "explicit:";
                for (std::size_t i = 0; i < s.values.size(); ++i) {
                    if (i) out += ',';
                    out += format_number(s.values[i]);
                }
                return out;
            }
        },
        schedule.kind());
}

ProcessState RatingSequence::state_after(std::size_t prefix) const {
    if (prefix > ratings.size()) throw std::out_of_range("prefix longer than sequence");
    ProcessState st;
    for (std::size_t i = 0; i < prefix; ++i) st.push(ratings[i] != 0);
    return st;
}

}  // namespace bandwagon
