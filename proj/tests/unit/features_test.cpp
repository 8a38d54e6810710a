#include <doctest.h>

#include <string>

#include "sse/corpus.hpp"
#include "sse/features.hpp"

using namespace sse;
using namespace sse::features;
using doctest::Approx;

namespace {

Document doc(std::string text, Source source = Source::deep_web, std::string ts = "2022-01-05T00:00:00Z") {
    Document d;
    d.id = "t";
    d.source = source;
    d.timestamp = parse_timestamp(ts);
    d.raw_text = std::move(text);
    return d;
}

}  // namespace

TEST_CASE("layout of a short text") {
    const auto f = layout_features("ab\n  cd\n\n");
    CHECK(f.width_min == 2);
    CHECK(f.width_max == 4);
    CHECK(f.width_mean == 3);
    CHECK(f.width_median == 3);
    CHECK(f.width_std == 1);
    CHECK(f.width_var == 1);
    CHECK(f.indent_min == 0);
    CHECK(f.indent_max == 2);
    CHECK(f.indent_mean == 1);
    CHECK(f.nonempty_lines == 2);
    CHECK(f.empty_lines == 1);
}

TEST_CASE("layout degenerate inputs") {
    CHECK(layout_features("") == LayoutFeatures{});
    const auto f = layout_features("xxxx");
    CHECK(f.width_min == 4);
    CHECK(f.width_max == 4);
    CHECK(f.width_mean == 4);
    CHECK(f.width_median == 4);
    CHECK(f.width_std == 0);
    CHECK(f.width_var == 0);
    CHECK(f.indent_max == 0);
    CHECK(f.nonempty_lines == 1);
    CHECK(f.empty_lines == 0);
    const auto ws = layout_features("   \n\t\n");
    CHECK(ws.nonempty_lines == 0);
    CHECK(ws.width_max == 0);
}

TEST_CASE("layout ignores trailing whitespace and line order") {
    CHECK(layout_features("abc   \n d") == layout_features("abc\n d"));
    const auto a = layout_features("one\n  two two\nthree three three\n\n x");
    const auto b = layout_features(" x\n\nthree three three\none\n  two two");
    CHECK(a.width_mean == Approx(b.width_mean));
    CHECK(a.width_median == b.width_median);
    CHECK(a.width_var == Approx(b.width_var));
    CHECK(a.indent_mean == Approx(b.indent_mean));
    CHECK(a.nonempty_lines == b.nonempty_lines);
}

TEST_CASE("an appended empty line only bumps the empty count") {
    const std::string text = "alpha\n  beta";
    auto a = layout_features(text);
    auto b = layout_features(text + "\n\n");
    CHECK(b.empty_lines >= a.empty_lines + 1);
    a.empty_lines = b.empty_lines = 0;
    CHECK(a == b);
}

TEST_CASE("pattern weights") {
    std::string text;
    for (int i = 0; i < 3; ++i) text += "user" + std::to_string(i) + "@mail.com ";
    for (int i = 0; i < 9; ++i) text += "https://site" + std::to_string(i) + ".org/page ";
    const auto f = pattern_item_features(text);
    CHECK(f.count(ItemKind::email) == 3);
    CHECK(f.count(ItemKind::url) == 9);
    CHECK(f.weight(ItemKind::email) == Approx(0.25));
    CHECK(f.weight(ItemKind::url) == Approx(0.75));
    CHECK(pattern_item_features("") == PatternItemFeatures{});
}

TEST_CASE("each pattern kind matches once in the mixed fixture") {
    const auto f = pattern_item_features("1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa a@b.co 10.0.0.1 http://x.onion/p");
    CHECK(f.count(ItemKind::bitcoin_address) == 1);
    CHECK(f.count(ItemKind::email) == 1);
    CHECK(f.count(ItemKind::ip_address) == 1);
    CHECK(f.count(ItemKind::url) == 1);
    CHECK(f.count(ItemKind::image) == 0);
    CHECK(f.count(ItemKind::credit_card) == 0);
    for (auto k : {ItemKind::bitcoin_address, ItemKind::email, ItemKind::ip_address, ItemKind::url})
        CHECK(f.weight(k) == Approx(0.25));
}

TEST_CASE("credit cards and IPs") {
    CHECK(luhn_valid("4111111111111111"));
    CHECK_FALSE(luhn_valid("4111111111111112"));
    CHECK(pattern_item_features("card 4111 1111 1111 1111 ok").count(ItemKind::credit_card) == 1);
    CHECK(pattern_item_features("card 4111 1111 1111 1112 no").count(ItemKind::credit_card) == 0);
    CHECK(pattern_item_features("256.1.1.1").count(ItemKind::ip_address) == 0);
    CHECK(pattern_item_features("1.2.3.4.5").count(ItemKind::ip_address) == 0);
    CHECK(pattern_item_features("at 8.8.8.8.").count(ItemKind::ip_address) == 1);
}

TEST_CASE("metadata") {
    const auto p = metadata_features(doc("", Source::pastebin));
    CHECK(p.src_deep == 0);
    CHECK(p.src_dark == 0);
    CHECK(p.src_social == 0);
    CHECK(p.src_pastebin == 1);
    CHECK(metadata_features(doc("", Source::deep_web, "1970-01-01T00:00:00Z")).date_scalar == 0);
    CHECK(metadata_features(doc("")).date_scalar == Approx(1.8997).epsilon(1e-12));
    CHECK(metadata_features(doc("", Source::deep_web, "2022-01-05T23:59:59Z")).date_scalar ==
          metadata_features(doc("")).date_scalar);
}

TEST_CASE("manual vector") {
    const auto d = doc("price 10 usd\n  mail a@b.co\n", Source::social_media);
    const auto v = assemble_manual_features(d);
    CHECK(v.size() == 31);
    CHECK(manual_schema().size() == 31);
    CHECK(v == assemble_manual_features(d));
    CHECK(v[kLayoutSize + kPatternSize + 2] == 1.0);
}
