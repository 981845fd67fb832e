#include "polar/types.hpp"

#include "polar/error.hpp"

#include <array>
#include <cctype>
#include <cmath>

namespace polar {

double distance(Vec2 a, Vec2 b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

std::string_view to_string(ActionLow action) {
    switch (action) {
        case ActionLow::move_forward: return "MOVE_FORWARD";
        case ActionLow::turn_left:    return "TURN_LEFT";
        case ActionLow::turn_right:   return "TURN_RIGHT";
        case ActionLow::stop:         return "STOP";
    }
    return "STOP";
}

ActionLow action_from_string(std::string_view name) {
    if (name == "MOVE_FORWARD") return ActionLow::move_forward;
    if (name == "TURN_LEFT")    return ActionLow::turn_left;
    if (name == "TURN_RIGHT")   return ActionLow::turn_right;
    if (name == "STOP")         return ActionLow::stop;
    throw RejectedInput("unknown action '" + std::string(name) + "'");
}

int normalize_heading(int degrees) {
    int h = degrees % 360;
    return h < 0 ? h + 360 : h;
}

bool is_valid_heading(int degrees) {
    return degrees >= 0 && degrees < 360 && degrees % 30 == 0;
}

Vec2 heading_direction(int heading) {
    static const double half_sqrt3 = std::sqrt(3.0) / 2.0;
    // (sin h, cos h) for h = 0, 30, ..., 330
    static const std::array<Vec2, 12> table = {{
        {0.0, 1.0},
        {0.5, half_sqrt3},
        {half_sqrt3, 0.5},
        {1.0, 0.0},
        {half_sqrt3, -0.5},
        {0.5, -half_sqrt3},
        {0.0, -1.0},
        {-0.5, -half_sqrt3},
        {-half_sqrt3, -0.5},
        {-1.0, 0.0},
        {-half_sqrt3, 0.5},
        {-0.5, half_sqrt3},
    }};
    const int h = normalize_heading(heading);
    if (h % 30 != 0) throw RejectedInput("heading must be a multiple of 30");
    return table[static_cast<std::size_t>(h / 30)];
}

double bearing_deg(Vec2 from, Vec2 to) {
    const double deg = std::atan2(to.x - from.x, to.y - from.y) * 180.0 / M_PI;
    return deg < 0.0 ? deg + 360.0 : deg;
}

double angle_diff_deg(double a, double b) {
    double d = std::fmod(std::fabs(a - b), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) {
            cur.push_back(static_cast<char>(std::tolower(uc)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace polar

#include "polar/rng.hpp"

namespace polar {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    // splitmix64 finalizer over the pair
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace polar
