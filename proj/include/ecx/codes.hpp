#ifndef ECX_CODES_HPP
#define ECX_CODES_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace ecx {

enum class Scheme { HS, IPC, CPC, Custom };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

// One classification code, stored in canonical form:
//   HS     - digit string of even length 2..6 ("850231")
//   IPC/CPC- upper case, all whitespace removed ("Y02E10/50")
//   Custom - any non-empty token, kept verbatim
// `digits` is the hierarchy depth: for HS the number of digits, for IPC/CPC
// the number of alphanumeric characters (the '/' separator does not count),
// for Custom the token length.
struct ActivityCode {
    Scheme scheme = Scheme::Custom;
    std::string code;
    int digits = 0;

    friend bool operator==(const ActivityCode&, const ActivityCode&) = default;
    friend auto operator<=>(const ActivityCode&, const ActivityCode&) = default;
};

// Canonicalizes `raw` for `scheme` and validates it.  Throws data_error on
// codes that are not scheme-legal.
ActivityCode make_code(Scheme scheme, const std::string& raw);

// Normalization used for matching only: IPC/CPC fold case and strip
// whitespace, HS and Custom are returned as-is (minus surrounding blanks).
std::string normalize_code(Scheme scheme, const std::string& raw);

int code_depth(Scheme scheme, const std::string& canonical);

// Truncates a canonical code to `digits` levels.  HS accepts 2/4/6; IPC and
// CPC accept 1, 3, 4 or deeper prefixes.  Throws data_error when the level
// does not exist for the scheme or exceeds the code's own depth.
ActivityCode truncate_code(const ActivityCode& code, int digits);

enum class MatchMode { Exact, Prefix };

struct GreenEntry {
    ActivityCode code;
    MatchMode mode = MatchMode::Exact;

    friend bool operator==(const GreenEntry&, const GreenEntry&) = default;
};

// A named list of activity codes flagged as green, e.g. the CPC Y02/Y04S
// tagging scheme or an HS product list.
struct GreenClassification {
    std::string name;
    std::vector<GreenEntry> entries;

    // True when `code` matches an exact entry or starts with a prefix entry.
    bool matches(const ActivityCode& code) const;
};

// Schemes are compatible when equal, or when both are patent classifications
// (IPC and CPC share the same code syntax and pattern space).
bool schemes_compatible(Scheme a, Scheme b);

// Reads a green list: one entry per line, `<code>` exact or `<code>*` prefix,
// '#' starts a comment, blank lines are skipped.  All entries take `scheme`.
GreenClassification parse_green_list(std::istream& in, const std::string& name,
                                     Scheme scheme);

}  // namespace ecx

#endif  // ECX_CODES_HPP
