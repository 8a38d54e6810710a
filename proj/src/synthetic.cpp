#include <array>
#include <cstdio>
#include <span>
#include <string_view>

#include "sse/corpus.hpp"
#include "sse/error.hpp"
#include "sse/rng.hpp"

namespace sse {

namespace {

using Lexicon = std::span<const std::string_view>;

constexpr std::string_view kSaleIntent[] = {
    "price",    "prices",   "ship",     "shipping", "escrow",   "vendor",   "order",   "stock",
    "discount", "bulk",     "sell",     "selling",  "offer",    "wholesale", "delivery", "payment",
    "listing",  "stealth",  "tracking", "refund",   "reship",   "quantity", "deal",    "buy",
    "purchase", "available", "restock", "pm",       "usd",      "checkout"};

constexpr std::string_view kDrug[] = {
    "mdma",     "cocaine",   "heroin",   "meth",     "ketamine",  "lsd",      "xanax",     "oxycodone",
    "fentanyl", "cannabis",  "weed",     "hashish",  "psilocybin", "adderall", "valium",   "tramadol",
    "codeine",  "amphetamine", "ecstasy", "molly",   "opium",     "kush",     "shrooms",   "percocet",
    "morphine", "diazepam",  "alprazolam", "methadone", "suboxone", "crack"};

constexpr std::string_view kWeapon[] = {
    "glock",    "pistol",     "rifle",    "ammo",     "ammunition", "handgun", "shotgun",  "suppressor",
    "silencer", "ar15",       "ak47",     "magazine", "caliber",    "beretta", "revolver", "firearm",
    "scope",    "barrel",     "holster",  "grenade",  "taser",      "carbine", "sig",      "cartridge",
    "bullets",  "rounds",     "9mm",      "trigger",  "receiver",   "armor"};

constexpr std::string_view kCredential[] = {
    "fullz",    "cvv",        "dumps",    "login",    "logins",     "password", "passwords", "combo",
    "combolist", "accounts",  "netflix",  "paypal",   "bank",       "ssn",      "dob",       "credentials",
    "hacked",   "cracked",    "leaked",   "database", "spotify",    "creds",    "cookies",   "rdp",
    "vpn",      "smtp",       "panel",    "checker",  "bins",       "logs"};

constexpr std::string_view kFiller[] = {
    "the",     "and",     "with",    "for",     "this",    "that",    "about",   "from",   "have",
    "will",    "just",    "like",    "people",  "think",   "time",    "really",  "thread", "post",
    "anyone",  "know",    "good",    "new",     "today",   "help",    "question", "update", "news",
    "forum",   "community", "thanks", "read",   "here",    "there",   "some",    "more",   "what",
    "when",    "how",     "why",     "world",   "day",     "week",    "year",    "guide",  "opinion",
    "story",   "share",   "info",    "topic",   "user",    "admin",   "reply",   "please", "best",
    "quality", "fast",    "contact", "message", "only",    "all",     "also",    "very",   "any",
    "first",   "last",    "still",   "back",    "after",   "before",  "other",   "most",   "many"};

constexpr std::string_view kDiscussion[] = {
    "research", "policy",  "health",   "law",      "police",  "arrest",  "report",  "study",
    "addiction", "safety", "history",  "rights",   "hunting", "security", "breach", "privacy",
    "article",  "debate",  "government", "court",  "journalist", "investigation", "treatment", "recovery",
    "legislation", "ban",  "experience", "advice", "warning", "scam"};

constexpr std::string_view kBase58 = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
constexpr std::string_view kOnion = "abcdefghijklmnopqrstuvwxyz234567";

std::string_view pick(Rng& rng, Lexicon lex) { return lex[static_cast<std::size_t>(rng.below(lex.size()))]; }

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

std::string random_chars(Rng& rng, std::string_view alphabet, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += alphabet[static_cast<std::size_t>(rng.below(alphabet.size()))];
    return s;
}

std::string bitcoin_address(Rng& rng) {
    return std::string(1, rng.bernoulli(0.5) ? '1' : '3') + random_chars(rng, kBase58, between(rng, 27, 33));
}

std::string onion_url(Rng& rng) {
    return "http://" + random_chars(rng, kOnion, 16) + ".onion/" + std::string(pick(rng, kFiller));
}

std::string email(Rng& rng) {
    return std::string(pick(rng, kFiller)) + std::to_string(rng.below(1000)) + "@" +
           random_chars(rng, "abcdefghijklmnopqrstuvwxyz", 6) + ".com";
}

std::string ip_address(Rng& rng) {
    return std::to_string(rng.below(223) + 1) + "." + std::to_string(rng.below(256)) + "." +
           std::to_string(rng.below(256)) + "." + std::to_string(rng.below(254) + 1);
}

std::string image_name(Rng& rng) {
    static constexpr std::string_view ext[] = {"jpg", "png", "jpeg", "gif"};
    return "img_" + std::to_string(rng.below(10000)) + "." + std::string(ext[rng.below(4)]);
}

/// 16-digit number passing the Luhn check, grouped in fours.
std::string credit_card(Rng& rng) {
    int digits[16];
    digits[0] = 4;
    for (int i = 1; i < 15; ++i) digits[i] = static_cast<int>(rng.below(10));
    int sum = 0;
    for (int i = 14, k = 0; i >= 0; --i, ++k) {
        int d = digits[i];
        if (k % 2 == 0) {
            d *= 2;
            if (d > 9) d -= 9;
        }
        sum += d;
    }
    digits[15] = (10 - sum % 10) % 10;
    std::string s;
    for (int i = 0; i < 16; ++i) {
        if (i > 0 && i % 4 == 0) s += ' ';
        s += static_cast<char>('0' + digits[i]);
    }
    return s;
}

LabelSet draw_labels(Rng& rng, bool sale) {
    LabelSet l;
    l.sale = sale;
    if (!sale) return l;
    const double u = rng.uniform();
    if (u < 0.45) l.drug = true;
    else if (u < 0.75) l.weapon = true;
    else l.credential = true;
    if (rng.bernoulli(0.1)) {
        switch (rng.below(3)) {
            case 0: l.drug = true; break;
            case 1: l.weapon = true; break;
            default: l.credential = true; break;
        }
    }
    return l;
}

std::vector<Lexicon> category_lexicons(const LabelSet& l) {
    std::vector<Lexicon> out;
    if (l.drug) out.emplace_back(kDrug);
    if (l.weapon) out.emplace_back(kWeapon);
    if (l.credential) out.emplace_back(kCredential);
    return out;
}

std::string sale_text(Rng& rng, const LabelSet& l, const SyntheticSpec& spec) {
    const auto cats = category_lexicons(l);
    std::string text = std::string(pick(rng, kFiller)) + " " + std::string(pick(rng, cats[rng.below(cats.size())])) +
                       " " + std::string(pick(rng, kSaleIntent)) + "\n";
    const std::size_t lines = between(rng, 3, 9);
    for (std::size_t i = 0; i < lines; ++i) {
        const bool bullet = rng.bernoulli(0.7);
        std::string line = bullet ? "  - " : "";
        const std::size_t words = between(rng, 3, 7);
        for (std::size_t w = 0; w < words; ++w) {
            if (w) line += ' ';
            line += pick(rng, kFiller);
        }
        if (rng.bernoulli(spec.signal_rate)) line += " " + std::string(pick(rng, kSaleIntent));
        if (rng.bernoulli(spec.signal_rate)) line += " " + std::string(pick(rng, cats[rng.below(cats.size())]));
        if (rng.bernoulli(0.3)) line += " " + std::to_string(between(rng, 5, 900)) + " usd";
        text += line + "\n";
        if (rng.bernoulli(0.15)) text += "\n";
    }
    if (rng.bernoulli(spec.pattern_rate)) {
        if (l.drug || l.credential) text += "btc: " + bitcoin_address(rng) + "\n";
        if (l.weapon) text += "photos: " + image_name(rng) + " " + image_name(rng) + "\n";
        if (l.credential) {
            text += "contact " + email(rng) + "\n";
            if (rng.bernoulli(0.5)) text += "sample " + credit_card(rng) + "\n";
            if (rng.bernoulli(0.3)) text += "rdp " + ip_address(rng) + "\n";
        }
    }
    if (rng.bernoulli(0.5)) text += "shop " + onion_url(rng) + "\n";
    return text;
}

std::string other_text(Rng& rng, const SyntheticSpec& spec) {
    std::vector<Lexicon> topic;
    if (rng.bernoulli(spec.confuser_rate)) {
        switch (rng.below(3)) {
            case 0: topic.emplace_back(kDrug); break;
            case 1: topic.emplace_back(kWeapon); break;
            default: topic.emplace_back(kCredential); break;
        }
    }
    std::string text;
    const std::size_t lines = between(rng, 2, 8);
    for (std::size_t i = 0; i < lines; ++i) {
        const std::size_t words = between(rng, 8, 16);
        std::string line;
        for (std::size_t w = 0; w < words; ++w) {
            if (w) line += ' ';
            if (rng.bernoulli(0.12)) line += pick(rng, kDiscussion);
            else line += pick(rng, kFiller);
        }
        if (!topic.empty() && rng.bernoulli(0.6)) line += " " + std::string(pick(rng, topic.front()));
        if (rng.bernoulli(0.05)) line += " " + std::string(pick(rng, kSaleIntent));
        text += line + "\n";
        if (rng.bernoulli(0.25)) text += "\n";
    }
    if (rng.bernoulli(0.3)) text += "source https://news.example.org/" + std::string(pick(rng, kFiller)) + "\n";
    if (rng.bernoulli(0.1)) text += "mail " + email(rng) + "\n";
    if (rng.bernoulli(0.05)) text += "node " + ip_address(rng) + "\n";
    return text;
}

Source draw_source(Rng& rng, const LabelSet& l) {
    const double u = rng.uniform();
    if (l.credential && u < 0.35) return Source::pastebin;
    const double v = rng.uniform();
    if (v < 0.25) return Source::deep_web;
    if (v < 0.6) return Source::dark_web;
    if (v < 0.85) return Source::social_media;
    return Source::pastebin;
}

Timestamp draw_timestamp(Rng& rng) {
    using namespace std::chrono;
    const sys_days start = year{2021} / September / 1;
    const sys_days end = year{2023} / September / 30;
    const auto span = static_cast<std::uint64_t>((end - start).count()) * 86400ULL;
    return Timestamp{start} + seconds{static_cast<long long>(rng.below(span))};
}

Document make_document(Rng& rng, std::string id, const LabelSet& truth, const SyntheticSpec& spec) {
    Document d;
    d.id = std::move(id);
    d.source = draw_source(rng, truth);
    d.timestamp = draw_timestamp(rng);
    d.raw_text = truth.sale ? sale_text(rng, truth, spec) : other_text(rng, spec);
    return d;
}

LabelSet flip(Rng& rng, const LabelSet& l) { return l.sale ? LabelSet{} : draw_labels(rng, true); }

std::string make_id(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%06zu", prefix, i);
    return buf;
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.labeled == 0 || spec.unlabeled == 0) throw ConfigError("synthetic corpus counts must be positive");
    if (!(spec.noise >= 0.0 && spec.noise < 1.0)) throw ConfigError("noise rate must lie in [0, 1)");
    for (double r : {spec.sale_rate, spec.signal_rate, spec.pattern_rate, spec.confuser_rate})
        if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("synthetic rates must lie in [0, 1]");

    Rng rng(mix_seed(seed, 0x5e1));
    Rng noise_rng(mix_seed(seed, 0x401));
    SyntheticCorpus out;

    std::vector<bool> sale_flags(spec.labeled);
    if (spec.sampling == LabeledSampling::stratified) {
        const auto positives =
            static_cast<std::size_t>(std::llround(spec.sale_rate * static_cast<double>(spec.labeled)));
        for (std::size_t i = 0; i < spec.labeled; ++i) sale_flags[i] = i < positives;
        std::vector<char> tmp(sale_flags.begin(), sale_flags.end());
        rng.shuffle(std::span(tmp));
        std::copy(tmp.begin(), tmp.end(), sale_flags.begin());
    } else {
        for (std::size_t i = 0; i < spec.labeled; ++i) sale_flags[i] = rng.bernoulli(spec.sale_rate);
    }

    for (std::size_t i = 0; i < spec.labeled; ++i) {
        const LabelSet truth = draw_labels(rng, sale_flags[i]);
        Document d = make_document(rng, make_id("lab", i), truth, spec);
        LabelSet observed = truth;
        if (noise_rng.bernoulli(spec.noise)) {
            observed = flip(noise_rng, truth);
            ++out.flipped;
        }
        d.labels = observed;
        out.labeled.push_back(std::move(d));
        out.clean_labels.push_back(truth);
    }
    for (std::size_t i = 0; i < spec.unlabeled; ++i) {
        const LabelSet truth = draw_labels(rng, rng.bernoulli(spec.sale_rate));
        out.unlabeled.push_back(make_document(rng, make_id("unl", i), truth, spec));
        out.unlabeled_truth.push_back(truth);
    }
    return out;
}

}  // namespace sse
