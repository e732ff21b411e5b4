#pragma once

// Phone number extraction, canonicalization and static country metadata.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "phonespam/common.hpp"

namespace phonespam {

enum class LineType { toll_free, mobile, landline, voip, unknown };

inline const char* to_string(LineType t) {
  switch (t) {
    case LineType::toll_free: return "toll_free";
    case LineType::mobile: return "mobile";
    case LineType::landline: return "landline";
    case LineType::voip: return "voip";
    case LineType::unknown: return "unknown";
  }
  return "unknown";
}

inline constexpr std::string_view kUnknownCountry = "unknown";

struct PhoneNumber {
  std::string canonical;  // digits only
  std::optional<int> country_code;
  std::string country{kUnknownCountry};
  LineType line_type{LineType::unknown};
  bool international_prefix{false};  // written with "+" or "00"

  friend bool operator==(const PhoneNumber&, const PhoneNumber&) = default;
};

struct PhoneMatch {
  PhoneNumber phone;
  std::size_t begin{0};  // byte offsets into the source text, [begin, end)
  std::size_t end{0};
  std::string raw;
};

struct PhoneLimits {
  std::size_t min_digits = 7;
  std::size_t max_digits = 15;
};

struct CountryEntry {
  int calling_code{0};
  std::string country;
  std::vector<std::string> toll_free_prefixes;  // national-number prefixes
  std::vector<std::string> mobile_prefixes;
  std::size_t min_len{0};  // national number length bounds
  std::size_t max_len{0};
};

// Bundled calling-code table. Covers every source country observed in the
// campaign study plus a handful of common extras. NANP is one entry.
inline constexpr std::string_view kDefaultCountryTableJson = R"json([
  {"calling_code": 1,   "country": "US/CA", "toll_free_prefixes": ["800","833","844","855","866","877","888"], "min_len": 10, "max_len": 10},
  {"calling_code": 20,  "country": "EG", "toll_free_prefixes": ["800"], "mobile_prefixes": ["1"], "min_len": 8, "max_len": 10},
  {"calling_code": 27,  "country": "ZA", "toll_free_prefixes": ["800"], "mobile_prefixes": ["6","7","8"], "min_len": 9, "max_len": 9},
  {"calling_code": 33,  "country": "FR", "toll_free_prefixes": ["800","805"], "mobile_prefixes": ["6","7"], "min_len": 9, "max_len": 9},
  {"calling_code": 34,  "country": "ES", "toll_free_prefixes": ["800","900"], "mobile_prefixes": ["6","7"], "min_len": 9, "max_len": 9},
  {"calling_code": 44,  "country": "GB", "toll_free_prefixes": ["800","808"], "mobile_prefixes": ["7"], "min_len": 9, "max_len": 10},
  {"calling_code": 49,  "country": "DE", "toll_free_prefixes": ["800"], "mobile_prefixes": ["15","16","17"], "min_len": 7, "max_len": 11},
  {"calling_code": 52,  "country": "MX", "toll_free_prefixes": ["800"], "min_len": 10, "max_len": 10},
  {"calling_code": 54,  "country": "AR", "toll_free_prefixes": ["800"], "mobile_prefixes": ["9"], "min_len": 10, "max_len": 11},
  {"calling_code": 55,  "country": "BR", "toll_free_prefixes": ["800"], "min_len": 10, "max_len": 11},
  {"calling_code": 56,  "country": "CL", "toll_free_prefixes": ["800"], "mobile_prefixes": ["9"], "min_len": 9, "max_len": 9},
  {"calling_code": 57,  "country": "CO", "toll_free_prefixes": ["1800"], "mobile_prefixes": ["3"], "min_len": 8, "max_len": 10},
  {"calling_code": 58,  "country": "VE", "toll_free_prefixes": ["800"], "mobile_prefixes": ["4"], "min_len": 10, "max_len": 10},
  {"calling_code": 60,  "country": "MY", "toll_free_prefixes": ["1800"], "mobile_prefixes": ["1"], "min_len": 8, "max_len": 10},
  {"calling_code": 61,  "country": "AU", "toll_free_prefixes": ["1800"], "mobile_prefixes": ["4"], "min_len": 9, "max_len": 9},
  {"calling_code": 62,  "country": "ID", "toll_free_prefixes": ["800","807"], "mobile_prefixes": ["8"], "min_len": 8, "max_len": 12},
  {"calling_code": 63,  "country": "PH", "toll_free_prefixes": ["1800"], "mobile_prefixes": ["9"], "min_len": 8, "max_len": 10},
  {"calling_code": 91,  "country": "IN", "toll_free_prefixes": ["1800"], "mobile_prefixes": ["6","7","8","9"], "min_len": 10, "max_len": 10},
  {"calling_code": 92,  "country": "PK", "toll_free_prefixes": ["800"], "mobile_prefixes": ["3"], "min_len": 9, "max_len": 10},
  {"calling_code": 233, "country": "GH", "toll_free_prefixes": ["800"], "mobile_prefixes": ["2","5"], "min_len": 9, "max_len": 9},
  {"calling_code": 234, "country": "NG", "toll_free_prefixes": ["800"], "mobile_prefixes": ["7","8","9"], "min_len": 8, "max_len": 10},
  {"calling_code": 502, "country": "GT", "toll_free_prefixes": ["1801"], "mobile_prefixes": ["3","4","5"], "min_len": 8, "max_len": 8},
  {"calling_code": 965, "country": "KW", "toll_free_prefixes": ["1800"], "mobile_prefixes": ["5","6","9"], "min_len": 8, "max_len": 8},
  {"calling_code": 966, "country": "SA", "toll_free_prefixes": ["800"], "mobile_prefixes": ["5"], "min_len": 9, "max_len": 9},
  {"calling_code": 971, "country": "AE", "toll_free_prefixes": ["800"], "mobile_prefixes": ["5"], "min_len": 8, "max_len": 9}
])json";

class CountryTable {
 public:
  CountryTable() = default;

  explicit CountryTable(std::vector<CountryEntry> entries) {
    for (auto& e : entries) {
      if (e.calling_code <= 0 || e.calling_code > 999)
        throw Error(ErrorCode::invalid_config, "calling code out of range: " + std::to_string(e.calling_code));
      if (e.country.empty() || e.country == kUnknownCountry)
        throw Error(ErrorCode::invalid_config, "entry without country for code " + std::to_string(e.calling_code));
      if (e.min_len == 0 || e.min_len > e.max_len)
        throw Error(ErrorCode::invalid_config, "bad length bounds for code " + std::to_string(e.calling_code));
      auto [it, inserted] = by_code_.emplace(e.calling_code, std::move(e));
      if (!inserted)
        throw Error(ErrorCode::invalid_config, "calling code listed twice: " + std::to_string(it->first));
    }
  }

  static CountryTable from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw Error(ErrorCode::invalid_config, "country table must be a JSON array");
    std::vector<CountryEntry> entries;
    try {
      for (const auto& row : j) {
        CountryEntry e;
        e.calling_code = row.at("calling_code").get<int>();
        e.country = row.at("country").get<std::string>();
        e.toll_free_prefixes = row.value("toll_free_prefixes", std::vector<std::string>{});
        e.mobile_prefixes = row.value("mobile_prefixes", std::vector<std::string>{});
        e.min_len = row.at("min_len").get<std::size_t>();
        e.max_len = row.at("max_len").get<std::size_t>();
        entries.push_back(std::move(e));
      }
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::invalid_config, std::string("country table: ") + ex.what());
    }
    return CountryTable(std::move(entries));
  }

  static CountryTable load(const std::string& path) {
    try {
      return from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& ex) {
      throw Error(ErrorCode::invalid_config, path + ": " + ex.what());
    }
  }

  static const CountryTable& bundled() {
    static const CountryTable table = from_json(nlohmann::json::parse(kDefaultCountryTableJson));
    return table;
  }

  const CountryEntry* find(int calling_code) const {
    auto it = by_code_.find(calling_code);
    return it == by_code_.end() ? nullptr : &it->second;
  }

  const CountryEntry* find_country(std::string_view country) const {
    for (const auto& [code, e] : by_code_)
      if (e.country == country) return &e;
    return nullptr;
  }

  const std::map<int, CountryEntry>& entries() const { return by_code_; }

  // Calling code for a canonical digit string. Without an explicit
  // international prefix only "long" numbers (>= 11 digits, no trunk 0) are
  // read as carrying a calling code; shorter ones are national format.
  const CountryEntry* resolve(std::string_view digits, bool explicit_international) const {
    if (!explicit_international && (digits.size() < 11 || digits.front() == '0')) return nullptr;
    for (std::size_t len = 1; len <= 3 && len < digits.size(); ++len) {
      const auto* e = find(std::stoi(std::string(digits.substr(0, len))));
      if (e == nullptr) continue;
      const auto national = digits.size() - len;
      if (national >= e->min_len && national <= e->max_len) return e;
    }
    return nullptr;
  }

 private:
  std::map<int, CountryEntry> by_code_;
};

inline nlohmann::json to_json(const CountryTable& table) {
  auto out = nlohmann::json::array();
  for (const auto& [code, e] : table.entries()) {
    nlohmann::json row{{"calling_code", e.calling_code},
                       {"country", e.country},
                       {"toll_free_prefixes", e.toll_free_prefixes},
                       {"min_len", e.min_len},
                       {"max_len", e.max_len}};
    if (!e.mobile_prefixes.empty()) row["mobile_prefixes"] = e.mobile_prefixes;
    out.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Line type

inline LineType classify_line_type(const PhoneNumber& phone, const CountryTable& table) {
  if (!phone.country_code) return LineType::unknown;
  const auto* entry = table.find(*phone.country_code);
  if (entry == nullptr) return LineType::unknown;
  const auto code_len = std::to_string(*phone.country_code).size();
  if (phone.canonical.size() <= code_len) return LineType::unknown;
  const std::string_view national = std::string_view(phone.canonical).substr(code_len);
  for (const auto& p : entry->toll_free_prefixes)
    if (starts_with(national, p)) return LineType::toll_free;
  for (const auto& p : entry->mobile_prefixes)
    if (starts_with(national, p)) return LineType::mobile;
  return LineType::unknown;
}

// ---------------------------------------------------------------------------
// Normalization

enum class PhoneRejection { none, too_short, too_long, non_numeric_core };

inline const char* to_string(PhoneRejection r) {
  switch (r) {
    case PhoneRejection::none: return "none";
    case PhoneRejection::too_short: return "too_short";
    case PhoneRejection::too_long: return "too_long";
    case PhoneRejection::non_numeric_core: return "non_numeric_core";
  }
  return "none";
}

struct NormalizeOutcome {
  std::optional<PhoneNumber> phone;
  PhoneRejection rejection{PhoneRejection::none};

  explicit operator bool() const { return phone.has_value(); }
};

inline NormalizeOutcome normalize_phone(std::string_view raw, const CountryTable& table,
                                        const PhoneLimits& limits = {}) {
  const auto core = trim(raw);
  std::string digits;
  digits.reserve(core.size());
  for (char c : core) {
    if (is_ascii_digit(c))
      digits.push_back(c);
    else if (is_ascii_alpha(c))
      return {std::nullopt, PhoneRejection::non_numeric_core};
  }
  if (digits.empty()) return {std::nullopt, PhoneRejection::non_numeric_core};

  bool international = !core.empty() && core.front() == '+';
  if (starts_with(digits, "00")) {
    digits.erase(0, 2);
    international = true;
  }
  if (digits.size() < limits.min_digits) return {std::nullopt, PhoneRejection::too_short};
  if (digits.size() > limits.max_digits) return {std::nullopt, PhoneRejection::too_long};

  PhoneNumber phone;
  phone.canonical = std::move(digits);
  phone.international_prefix = international;
  if (const auto* entry = table.resolve(phone.canonical, international)) {
    phone.country_code = entry->calling_code;
    phone.country = entry->country;
  }
  phone.line_type = classify_line_type(phone, table);
  return {std::move(phone), PhoneRejection::none};
}

// ---------------------------------------------------------------------------
// Extraction

struct ExtractOptions {
  PhoneLimits limits{};
  std::size_t max_separator_run = 12;
};

namespace detail {

inline bool is_phone_separator(char c) { return c == ' ' || c == '-' || c == '.' || c == '(' || c == ')'; }
inline bool is_word_char(char c) { return is_ascii_digit(c) || is_ascii_alpha(c) || c == '_'; }

struct DigitGroup {
  std::size_t begin;
  std::size_t end;
};

// "2016-04-25", "25.04.2016" style dates that would otherwise pass as 8 digits.
inline bool looks_like_date(std::string_view text, const std::vector<DigitGroup>& groups, std::size_t first,
                            std::size_t last) {
  if (last - first != 2) return false;
  std::array<std::size_t, 3> lens{};
  for (std::size_t i = 0; i < 3; ++i) lens[i] = groups[first + i].end - groups[first + i].begin;
  const auto year_first = lens == std::array<std::size_t, 3>{4, 2, 2};
  const auto year_last = lens == std::array<std::size_t, 3>{2, 2, 4};
  if (!year_first && !year_last) return false;
  const auto& yg = groups[year_first ? first : first + 2];
  const auto year = text.substr(yg.begin, 2);
  return year == "19" || year == "20";
}

}  // namespace detail

inline std::vector<PhoneMatch> extract_phone_numbers(std::string_view text, const CountryTable& table,
                                                     const ExtractOptions& opts = {}) {
  using detail::DigitGroup;
  std::vector<PhoneMatch> out;
  const auto n = text.size();
  std::size_t i = 0;

  while (i < n) {
    // Candidate start: digit, "+digit", "+(digit", or "(digit".
    std::size_t start = i;
    std::size_t first_digit = std::string_view::npos;
    if (is_ascii_digit(text[i])) {
      first_digit = i;
    } else if (text[i] == '+' || text[i] == '(') {
      std::size_t j = i + 1;
      if (text[i] == '+' && j < n && text[j] == '(') ++j;
      if (j < n && is_ascii_digit(text[j])) first_digit = j;
    }
    if (first_digit == std::string_view::npos || (start > 0 && detail::is_word_char(text[start - 1]))) {
      ++i;
      continue;
    }

    // Currency amounts: "$ 1500", "$1500".
    bool currency = false;
    for (std::size_t k = start; k > 0; --k) {
      const char c = text[k - 1];
      if (c == ' ') continue;
      currency = c == '$';
      break;
    }

    std::vector<DigitGroup> groups;
    std::size_t pos = first_digit;
    while (true) {
      const std::size_t gb = pos;
      while (pos < n && is_ascii_digit(text[pos])) ++pos;
      groups.push_back({gb, pos});
      std::size_t sep = pos;
      while (sep < n && detail::is_phone_separator(text[sep]) && sep - pos < opts.max_separator_run) ++sep;
      if (sep > pos && sep < n && is_ascii_digit(text[sep]))
        pos = sep;
      else
        break;
    }
    const std::size_t run_end = groups.back().end;
    i = run_end;

    if (currency) continue;
    if (run_end < n) {
      const char next = text[run_end];
      if (is_ascii_alpha(next) || next == '_' || next == '$') continue;
      if (text.substr(run_end, 3) == "\xE2\x80\xA6") continue;  // truncated ("…")
    }

    // Greedy split of the group chain into chunks of at most max_digits.
    std::size_t g = 0;
    while (g < groups.size()) {
      std::size_t digits = 0;
      std::size_t last = g;
      while (last < groups.size() && digits + (groups[last].end - groups[last].begin) <= opts.limits.max_digits) {
        digits += groups[last].end - groups[last].begin;
        ++last;
      }
      if (last == g) {  // a single group longer than the maximum
        ++g;
        continue;
      }
      if (!detail::looks_like_date(text, groups, g, last - 1)) {
        std::size_t b = groups[g].begin;
        if (g == 0) {
          b = start;
          const auto chunk = text.substr(b, groups[last - 1].end - b);
          const auto paren = chunk.find('(');
          if (paren != std::string_view::npos && chunk.find(')', paren) == std::string_view::npos) {
            // Unbalanced leading "(" belongs to the surrounding text.
            b = (chunk.front() == '+') ? b : first_digit;
          }
        }
        const auto e = groups[last - 1].end;
        auto raw = text.substr(b, e - b);
        if (auto norm = normalize_phone(raw, table, opts.limits)) {
          out.push_back(PhoneMatch{std::move(*norm.phone), b, e, std::string(raw)});
        }
      }
      g = last;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Origin country

enum class CountryProvenance { calling_code, language_heuristic, unknown };

inline const char* to_string(CountryProvenance p) {
  switch (p) {
    case CountryProvenance::calling_code: return "calling_code";
    case CountryProvenance::language_heuristic: return "language_heuristic";
    case CountryProvenance::unknown: return "unknown";
  }
  return "unknown";
}

struct CountryAssignment {
  std::string country{kUnknownCountry};
  std::optional<int> calling_code;
  CountryProvenance provenance{CountryProvenance::unknown};
};

// Post language tags that pin down a single country. Tags shared by many
// countries (en, es, ar, fr, ...) are deliberately absent.
inline const std::map<std::string, std::string, std::less<>>& default_language_countries() {
  static const std::map<std::string, std::string, std::less<>> m = {
      {"in", "ID"}, {"id", "ID"}, {"hi", "IN"}, {"mr", "IN"}, {"te", "IN"}, {"ta", "IN"},
      {"gu", "IN"}, {"kn", "IN"}, {"ml", "IN"}, {"ur", "PK"}, {"th", "TH"}, {"ja", "JP"},
  };
  return m;
}

inline CountryAssignment infer_country(
    const PhoneNumber& phone, const std::optional<std::string>& post_language, const CountryTable& table,
    const std::map<std::string, std::string, std::less<>>& language_countries = default_language_countries()) {
  if (phone.country_code) {
    if (const auto* e = table.find(*phone.country_code)) return {e->country, e->calling_code, CountryProvenance::calling_code};
  }
  if (post_language) {
    auto it = language_countries.find(to_lower(*post_language));
    if (it != language_countries.end()) {
      CountryAssignment a{it->second, std::nullopt, CountryProvenance::language_heuristic};
      if (const auto* e = table.find_country(it->second)) a.calling_code = e->calling_code;
      return a;
    }
  }
  return {};
}

}  // namespace phonespam
