#include "ecx/codes.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <set>

#include "ecx/errors.hpp"

namespace ecx {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::HS: return "HS";
        case Scheme::IPC: return "IPC";
        case Scheme::CPC: return "CPC";
        case Scheme::Custom: return "custom";
    }
    return "custom";
}

Scheme scheme_from_string(const std::string& s) {
    std::string up;
    for (char c : s) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (up == "HS") return Scheme::HS;
    if (up == "IPC") return Scheme::IPC;
    if (up == "CPC") return Scheme::CPC;
    if (up == "CUSTOM") return Scheme::Custom;
    throw data_error("unknown classification scheme: '" + s + "'");
}

namespace {

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool all_digits(const std::string& s) {
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

// Canonical IPC/CPC shape after whitespace removal: section letter, then
// optionally class digits, subclass letter, and a numeric group with an
// optional /subgroup.  Truncated prefixes of this shape are also legal.
bool valid_patent_code(const std::string& s) {
    std::size_t i = 0;
    auto digit_run = [&]() {
        std::size_t n = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; ++n; }
        return n;
    };
    if (s.empty() || !std::isupper(static_cast<unsigned char>(s[0]))) return false;
    i = 1;
    if (i == s.size()) return true;                       // section, e.g. "Y"
    std::size_t cls = digit_run();
    if (cls != 2) return false;                           // class digits, e.g. "Y02"
    if (i == s.size()) return true;
    if (!std::isupper(static_cast<unsigned char>(s[i]))) return false;
    ++i;                                                  // subclass letter, e.g. "Y02E"
    if (i == s.size()) return true;
    if (digit_run() == 0) return false;                   // group, e.g. "Y02E10"
    if (i == s.size()) return true;
    if (s[i] != '/') return false;
    ++i;                                                  // subgroup, e.g. "Y02E10/50"
    return digit_run() > 0 && i == s.size();
}

}  // namespace

std::string normalize_code(Scheme scheme, const std::string& raw) {
    std::string s = strip(raw);
    if (scheme == Scheme::IPC || scheme == Scheme::CPC) {
        std::string out;
        out.reserve(s.size());
        for (char c : s) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        }
        return out;
    }
    return s;
}

int code_depth(Scheme scheme, const std::string& canonical) {
    if (scheme == Scheme::IPC || scheme == Scheme::CPC) {
        auto n = std::count_if(canonical.begin(), canonical.end(), [](unsigned char c) {
            return std::isalnum(c) != 0;
        });
        return static_cast<int>(n);
    }
    return static_cast<int>(canonical.size());
}

ActivityCode make_code(Scheme scheme, const std::string& raw) {
    std::string canonical = normalize_code(scheme, raw);
    switch (scheme) {
        case Scheme::HS:
            if (!all_digits(canonical) || canonical.size() < 2 || canonical.size() > 6 ||
                canonical.size() % 2 != 0)
                throw data_error("invalid HS code: '" + raw + "'");
            break;
        case Scheme::IPC:
        case Scheme::CPC:
            if (!valid_patent_code(canonical))
                throw data_error("invalid " + to_string(scheme) + " code: '" + raw + "'");
            break;
        case Scheme::Custom:
            if (canonical.empty()) throw data_error("empty custom code");
            break;
    }
    return ActivityCode{scheme, canonical, code_depth(scheme, canonical)};
}

ActivityCode truncate_code(const ActivityCode& code, int digits) {
    if (digits < 1) throw data_error("truncation level must be >= 1");
    if (digits > code.digits)
        throw data_error("cannot truncate '" + code.code + "' to " + std::to_string(digits) +
                         " digits: code has depth " + std::to_string(code.digits));
    if (digits == code.digits) return code;
    switch (code.scheme) {
        case Scheme::HS:
            if (digits % 2 != 0)
                throw data_error("HS aggregation level must be even, got " +
                                 std::to_string(digits));
            return make_code(code.scheme, code.code.substr(0, static_cast<std::size_t>(digits)));
        case Scheme::IPC:
        case Scheme::CPC: {
            if (digits == 2)
                throw data_error(to_string(code.scheme) +
                                 " has no 2-digit level (use 1, 3, 4, or deeper)");
            // Keep the first `digits` alphanumeric characters; '/' is a
            // separator and survives only with digits on both sides.
            std::string out;
            int kept = 0;
            for (char c : code.code) {
                if (c == '/') {
                    if (kept < digits) out.push_back(c);
                    continue;
                }
                if (kept == digits) break;
                out.push_back(c);
                ++kept;
            }
            if (!out.empty() && out.back() == '/') out.pop_back();
            return make_code(code.scheme, out);
        }
        case Scheme::Custom:
            return make_code(code.scheme, code.code.substr(0, static_cast<std::size_t>(digits)));
    }
    throw data_error("unreachable scheme");
}

bool schemes_compatible(Scheme a, Scheme b) {
    if (a == b) return true;
    auto patent = [](Scheme s) { return s == Scheme::IPC || s == Scheme::CPC; };
    return patent(a) && patent(b);
}

bool GreenClassification::matches(const ActivityCode& code) const {
    for (const auto& entry : entries) {
        if (!schemes_compatible(entry.code.scheme, code.scheme)) continue;
        if (entry.mode == MatchMode::Exact) {
            if (code.code == entry.code.code) return true;
        } else if (code.code.starts_with(entry.code.code)) {
            return true;
        }
    }
    return false;
}

GreenClassification parse_green_list(std::istream& in, const std::string& name, Scheme scheme) {
    GreenClassification cls;
    cls.name = name;
    std::set<std::pair<std::string, MatchMode>> seen;
    std::string line;
    std::size_t lineno = 0;
    std::vector<parse_error::bad_line> bad;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = strip(line);
        if (s.empty() || s[0] == '#') continue;
        MatchMode mode = MatchMode::Exact;
        if (s.back() == '*') {
            mode = MatchMode::Prefix;
            s = strip(s.substr(0, s.size() - 1));
        }
        try {
            ActivityCode code = make_code(scheme, s);
            if (seen.emplace(code.code, mode).second)
                cls.entries.push_back(GreenEntry{std::move(code), mode});
        } catch (const data_error& e) {
            bad.push_back({lineno, e.what()});
        }
    }
    if (!bad.empty())
        throw parse_error("green list '" + name + "': " + std::to_string(bad.size()) +
                              " malformed line(s)",
                          std::move(bad));
    if (cls.entries.empty())
        throw data_error("green list '" + name + "' has no entries");
    return cls;
}

}  // namespace ecx
