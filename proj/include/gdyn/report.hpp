#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace gdyn {

// One named check over many samples. A sample fails when its defect exceeds tol; for bound checks the
// defect is (lhs - bound), so negative values are slack.
struct Check {
    std::string name;
    double tol = 0.0;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double max_defect = -std::numeric_limits<double>::infinity();
    std::string argmax;
    std::vector<std::string> offenders;
    std::string note;

    Check() = default;
    Check(std::string n, double t) : name(std::move(n)), tol(t) {}

    bool pass() const { return violations == 0; }

    void add(double defect, const std::string& where) {
        ++samples;
        if (defect > max_defect || samples == 1) {
            max_defect = defect;
            argmax = where;
        }
        if (!(defect <= tol)) {
            ++violations;
            if (offenders.size() < 20) offenders.push_back(where);
        }
    }

    void add_flag(bool ok, const std::string& where) { add(ok ? 0.0 : 1.0, where); }
};

struct Report {
    std::string name;
    std::vector<Check> checks;
    std::vector<std::string> notes;

    Report() = default;
    explicit Report(std::string n) : name(std::move(n)) {}

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass()) return false;
        return true;
    }
    Check& add(Check c) {
        checks.push_back(std::move(c));
        return checks.back();
    }
    const Check* find(const std::string& n) const {
        for (const auto& c : checks)
            if (c.name == n) return &c;
        return nullptr;
    }
};

}  // namespace gdyn
