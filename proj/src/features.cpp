#include "sse/features.hpp"

#include <algorithm>
#include <cmath>
#include <locale>
#include <numeric>
#include <regex>

namespace sse::features {

std::string_view to_string(ItemKind kind) {
    switch (kind) {
        case ItemKind::image: return "image";
        case ItemKind::credit_card: return "credit_card";
        case ItemKind::ip_address: return "ip_address";
        case ItemKind::email: return "email";
        case ItemKind::url: return "url";
        case ItemKind::bitcoin_address: return "bitcoin_address";
    }
    return "image";
}

const std::array<std::string, kManualSize>& manual_schema() {
    static const auto schema = [] {
        std::array<std::string, kManualSize> names;
        std::size_t i = 0;
        for (const char* block : {"width", "indent"})
            for (const char* stat : {"min", "max", "mean", "median", "std", "var"})
                names[i++] = std::string("layout_") + block + "_" + stat;
        names[i++] = "layout_nonempty_lines";
        names[i++] = "layout_empty_lines";
        for (auto k : kAllItemKinds) {
            names[i++] = "item_" + std::string(to_string(k)) + "_count";
            names[i++] = "item_" + std::string(to_string(k)) + "_weight";
        }
        for (const char* m : {"src_deep", "src_dark", "src_social", "src_pastebin", "date_scalar"})
            names[i++] = std::string("meta_") + m;
        return names;
    }();
    return schema;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

/// Number of UTF-8 code points (continuation bytes are not counted).
std::size_t code_points(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

struct Summary {
    double min = 0, max = 0, mean = 0, median = 0, std = 0, var = 0;
};

Summary summarize(std::vector<double> values) {
    Summary s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    s.min = values.front();
    s.max = values.back();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    s.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.var = ss / static_cast<double>(n);
    s.std = std::sqrt(s.var);
    return s;
}

}  // namespace

LayoutFeatures layout_features(std::string_view raw_text) {
    std::vector<double> widths, indents;
    LayoutFeatures f;
    std::size_t start = 0;
    while (start < raw_text.size()) {
        auto end = raw_text.find('\n', start);
        if (end == std::string_view::npos) end = raw_text.size();
        const auto line = raw_text.substr(start, end - start);
        std::size_t lead = 0;
        while (lead < line.size() && is_space(line[lead])) ++lead;
        if (lead == line.size()) {
            ++f.empty_lines;
        } else {
            std::size_t stop = line.size();
            while (stop > 0 && is_space(line[stop - 1])) --stop;
            ++f.nonempty_lines;
            widths.push_back(static_cast<double>(code_points(line.substr(0, stop))));
            indents.push_back(static_cast<double>(lead));
        }
        start = end + 1;
    }
    const auto w = summarize(std::move(widths));
    const auto d = summarize(std::move(indents));
    f.width_min = w.min, f.width_max = w.max, f.width_mean = w.mean, f.width_median = w.median;
    f.width_std = w.std, f.width_var = w.var;
    f.indent_min = d.min, f.indent_max = d.max, f.indent_mean = d.mean, f.indent_median = d.median;
    f.indent_std = d.std, f.indent_var = d.var;
    return f;
}

namespace {

using Span = std::pair<std::size_t, std::size_t>;

std::regex make_regex(const char* pattern, std::regex::flag_type extra = {}) {
    std::regex r;
    r.imbue(std::locale::classic());
    r.assign(pattern, std::regex::ECMAScript | std::regex::optimize | extra);
    return r;
}

std::vector<Span> regex_spans(std::string_view text, const std::regex& re) {
    std::vector<Span> out;
    using It = std::string_view::const_iterator;
    for (std::regex_iterator<It> it(text.begin(), text.end(), re), end; it != end; ++it) {
        const auto pos = static_cast<std::size_t>(it->position());
        const auto len = static_cast<std::size_t>(it->length());
        if (len == 0) continue;
        out.emplace_back(pos, pos + len);
    }
    return out;
}

const std::regex& email_re() {
    static const auto re = make_regex(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})");
    return re;
}
const std::regex& scheme_url_re() {
    static const auto re = make_regex(R"((?:https?|ftp)://[^\s<>"]+)");
    return re;
}
const std::regex& onion_re() {
    static const auto re = make_regex(R"((?:[A-Za-z0-9-]+\.)*[A-Za-z0-9-]+\.onion(?![A-Za-z0-9-])(?:/[^\s<>"]*)?)",
                                      std::regex::icase);
    return re;
}
const std::regex& bitcoin_re() {
    static const auto re =
        make_regex(R"(\b(?:[13][a-km-zA-HJ-NP-Z1-9]{25,34}|bc1[02-9ac-hj-np-z]{11,71})\b)");
    return re;
}
const std::regex& image_re() {
    static const auto re = make_regex(R"(<img|\.(?:png|jpe?g|gif|bmp|webp)(?![A-Za-z0-9]))", std::regex::icase);
    return re;
}

std::vector<Span> url_spans(std::string_view text) {
    auto spans = regex_spans(text, scheme_url_re());
    const auto schemed = spans;
    for (const auto& s : regex_spans(text, onion_re())) {
        const bool overlaps = std::any_of(schemed.begin(), schemed.end(),
                                          [&](const Span& u) { return s.first < u.second && u.first < s.second; });
        const bool mid_token = s.first > 0 && (text[s.first - 1] == '.' || text[s.first - 1] == '/' ||
                                               text[s.first - 1] == '@' || text[s.first - 1] == ':');
        if (!overlaps && !mid_token) spans.push_back(s);
    }
    std::sort(spans.begin(), spans.end());
    return spans;
}

bool valid_octet(std::string_view s) {
    if (s.empty() || s.size() > 3) return false;
    if (s.size() > 1 && s[0] == '0') return false;
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v <= 255;
}

/// Maximal runs of digits and dots that form exactly four valid octets.
std::vector<Span> ip_spans(std::string_view text) {
    std::vector<Span> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_digit(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && (is_digit(text[j]) || text[j] == '.')) ++j;
        std::size_t stop = j;
        while (stop > i && text[stop - 1] == '.') --stop;  // sentence-final period
        const bool dotted_before = i > 0 && text[i - 1] == '.';
        const auto run = text.substr(i, stop - i);
        int parts = 0;
        bool ok = !dotted_before;
        std::size_t p = 0;
        while (ok && p <= run.size()) {
            auto q = run.find('.', p);
            if (q == std::string_view::npos) q = run.size();
            ok = valid_octet(run.substr(p, q - p));
            ++parts;
            p = q + 1;
        }
        if (ok && parts == 4) out.emplace_back(i, stop);
        i = j;
    }
    return out;
}

/// Maximal digit runs with single space/dash separators, 13-19 digits, Luhn valid.
std::vector<Span> credit_card_spans(std::string_view text) {
    std::vector<Span> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_digit(text[i])) {
            ++i;
            continue;
        }
        std::string digits;
        std::size_t j = i;
        while (j < text.size()) {
            if (is_digit(text[j])) {
                digits += text[j++];
            } else if ((text[j] == ' ' || text[j] == '-') && j + 1 < text.size() && is_digit(text[j + 1])) {
                ++j;
            } else {
                break;
            }
        }
        if (digits.size() >= 13 && digits.size() <= 19 && luhn_valid(digits)) out.emplace_back(i, j);
        i = j;
    }
    return out;
}

}  // namespace

bool luhn_valid(std::string_view digits) {
    if (digits.empty()) return false;
    int sum = 0;
    bool dbl = false;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (!is_digit(*it)) return false;
        int d = *it - '0';
        if (dbl) {
            d *= 2;
            if (d > 9) d -= 9;
        }
        sum += d;
        dbl = !dbl;
    }
    return sum % 10 == 0;
}

std::vector<Span> find_items(std::string_view raw_text, ItemKind kind) {
    switch (kind) {
        case ItemKind::image: return regex_spans(raw_text, image_re());
        case ItemKind::credit_card: return credit_card_spans(raw_text);
        case ItemKind::ip_address: return ip_spans(raw_text);
        case ItemKind::email: return regex_spans(raw_text, email_re());
        case ItemKind::url: return url_spans(raw_text);
        case ItemKind::bitcoin_address: return regex_spans(raw_text, bitcoin_re());
    }
    return {};
}

PatternItemFeatures pattern_item_features(std::string_view raw_text) {
    PatternItemFeatures f;
    std::size_t total = 0;
    for (std::size_t k = 0; k < kItemKinds; ++k) {
        f.counts[k] = find_items(raw_text, kAllItemKinds[k]).size();
        total += f.counts[k];
    }
    if (total > 0)
        for (std::size_t k = 0; k < kItemKinds; ++k)
            f.weights[k] = static_cast<double>(f.counts[k]) / static_cast<double>(total);
    return f;
}

MetadataFeatures metadata_features(const Document& doc) {
    MetadataFeatures m;
    switch (doc.source) {
        case Source::deep_web: m.src_deep = 1; break;
        case Source::dark_web: m.src_dark = 1; break;
        case Source::social_media: m.src_social = 1; break;
        case Source::pastebin: m.src_pastebin = 1; break;
    }
    const auto days = std::chrono::floor<std::chrono::days>(doc.timestamp).time_since_epoch().count();
    m.date_scalar = static_cast<double>(days) * 1e-4;
    return m;
}

ManualFeatureVector assemble_manual_features(const Document& doc) {
    const auto l = layout_features(doc.raw_text);
    const auto p = pattern_item_features(doc.raw_text);
    const auto m = metadata_features(doc);
    ManualFeatureVector v{l.width_min,   l.width_max,   l.width_mean,   l.width_median,  l.width_std,
                          l.width_var,   l.indent_min,  l.indent_max,   l.indent_mean,   l.indent_median,
                          l.indent_std,  l.indent_var,  static_cast<double>(l.nonempty_lines),
                          static_cast<double>(l.empty_lines)};
    std::size_t i = kLayoutSize;
    for (std::size_t k = 0; k < kItemKinds; ++k) {
        v[i++] = static_cast<double>(p.counts[k]);
        v[i++] = p.weights[k];
    }
    v[i++] = m.src_deep;
    v[i++] = m.src_dark;
    v[i++] = m.src_social;
    v[i++] = m.src_pastebin;
    v[i++] = m.date_scalar;
    return v;
}

}  // namespace sse::features
