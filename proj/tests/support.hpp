#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "sse/corpus.hpp"
#include "sse/pipeline.hpp"
#include "sse/selftrain.hpp"

namespace sse::testing {

// Featurized Stage-1 view of a corpus split, built the same way the pipeline does it.
struct Stage1Data {
    selftrain::LabeledSet train, validation, test;
    selftrain::UnlabeledSet unlabeled;
};

inline std::vector<Document> synthetic_docs(const SyntheticSpec& spec, std::uint64_t seed) {
    auto c = generate_synthetic_corpus(spec, seed);
    auto docs = std::move(c.labeled);
    docs.insert(docs.end(), c.unlabeled.begin(), c.unlabeled.end());
    return docs;
}

inline Stage1Data stage1_data(const std::vector<Document>& docs, const DatasetSplit& split, std::size_t max_features) {
    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& d : docs) by_id[d.id] = &d;
    auto pick = [&](const std::vector<std::string>& ids) {
        std::vector<const Document*> out;
        for (const auto& id : ids) out.push_back(by_id.at(id));
        return out;
    };
    const auto tr = pick(split.train), va = pick(split.validation), te = pick(split.test);
    std::vector<const Document*> un;
    for (const auto& d : docs)
        if (!d.labeled()) un.push_back(&d);
    std::vector<std::string> texts;
    for (const auto* d : tr) texts.push_back(d->raw_text);
    for (const auto* d : un) texts.push_back(d->raw_text);
    const auto fz = pipeline::Featurizer::fit_tfidf(texts, max_features);
    auto labeled = [&](const std::vector<const Document*>& ds, const std::vector<std::string>& ids) {
        selftrain::LabeledSet s{fz.matrix(ds), {}, ids};
        for (const auto* d : ds) s.y.push_back(d->labels->sale ? 1 : 0);
        return s;
    };
    Stage1Data out{labeled(tr, split.train), labeled(va, split.validation), labeled(te, split.test),
                   {fz.matrix(un), {}}};
    for (const auto* d : un) out.unlabeled.ids.push_back(d->id);
    return out;
}

}  // namespace sse::testing
