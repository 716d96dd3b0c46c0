#include <map>
#include <set>

#include "doctest.h"
#include "nerrep/errors.h"
#include "nerrep/synth.h"

using namespace nerrep;

namespace {

SynthConfig Small(double rate, uint64_t seed = 1) {
  SynthConfig c;
  c.n_docs = 60;
  c.context_dependence_rate = rate;
  c.seed = seed;
  return c;
}

PackerConfig Packer(Strategy s, int max_len = 128) {
  PackerConfig p;
  p.max_len = max_len;
  p.strategy = s;
  return p;
}

std::string Text(const Sentence& s, int start, int end) {
  std::string out;
  for (int i = start; i < end; ++i) {
    if (i > start) out += " ";
    out += s.tokens[i].text;
  }
  return out;
}

}  // namespace

TEST_CASE("validation") {
  SynthConfig c;
  c.cue_distance = 0;
  CHECK_THROWS_AS(GenerateSynthCorpus(c), Error);
  c = SynthConfig{};
  c.cue_distance = c.sentences_per_doc;
  CHECK_THROWS_AS(GenerateSynthCorpus(c), Error);
  c = SynthConfig{};
  c.cue_distance_max = c.sentences_per_doc;
  CHECK_THROWS_AS(GenerateSynthCorpus(c), Error);
  c = SynthConfig{};
  c.context_dependence_rate = 1.2;
  CHECK_THROWS_AS(GenerateSynthCorpus(c), Error);
  c = SynthConfig{};
  c.category_count = 5;
  CHECK_THROWS_AS(GenerateSynthCorpus(c), Error);
  c = SynthConfig{};
  c.n_docs = 0;
  CHECK_THROWS_AS(GenerateSynthCorpus(c), Error);
}

TEST_CASE("deterministic given seed") {
  auto a = GenerateSynthCorpus(Small(0.7, 5));
  auto b = GenerateSynthCorpus(Small(0.7, 5));
  CHECK(a.dataset == b.dataset);
  CHECK(a.mentions.size() == b.mentions.size());
  auto c = GenerateSynthCorpus(Small(0.7, 6));
  CHECK_FALSE(a.dataset == c.dataset);
}

TEST_CASE("structure and metadata") {
  SynthConfig cfg = Small(0.7);
  cfg.cue_distance = 1;
  cfg.cue_distance_max = 3;
  cfg.category_count = 3;
  auto corpus = GenerateSynthCorpus(cfg);
  const auto& ds = corpus.dataset;
  CHECK(ds.documents.size() == 60);
  CHECK(corpus.categories == std::vector<std::string>{"LOC", "ORG", "PER"});
  std::set<std::string> cue_words;
  std::map<std::string, std::string> cue_category;
  for (size_t c = 0; c < corpus.cue_words.size(); ++c) {
    for (const auto& w : corpus.cue_words[c]) {
      cue_words.insert(w);
      cue_category[w] = corpus.categories[c];
    }
  }
  size_t annotations = 0;
  for (const auto& d : ds.documents) {
    CHECK(d.sentences.size() == 12);
    for (const auto& s : d.sentences) annotations += s.annotations.size();
  }
  CHECK(annotations == corpus.mentions.size());
  int dependent = 0;
  std::set<int> distances;
  for (const auto& m : corpus.mentions) {
    const auto& s = ds.documents[m.document].sentences[m.sentence];
    CHECK(std::count(s.annotations.begin(), s.annotations.end(),
                     Annotation{m.category, m.start, m.end}) == 1);
    CHECK(Text(s, m.start, m.end) == m.form);
    // The nearest preceding cue lies in the cue sentence and names the
    // category.
    CHECK(m.cue_sentence < m.sentence);
    distances.insert(m.sentence - m.cue_sentence);
    const auto& cue = ds.documents[m.document].sentences[m.cue_sentence];
    int cues = 0;
    for (const auto& t : cue.tokens) {
      if (cue_words.count(t.text)) {
        ++cues;
        CHECK(cue_category[t.text] == m.category);
      }
    }
    CHECK(cues == 1);
    for (int between = m.cue_sentence + 1; between <= m.sentence; ++between) {
      for (const auto& t : ds.documents[m.document].sentences[between].tokens) {
        CHECK(cue_words.count(t.text) == 0);
      }
    }
    dependent += m.context_dependent;
  }
  CHECK(distances == std::set<int>{1, 2, 3});
  const double share = static_cast<double>(dependent) / corpus.mentions.size();
  CHECK(share > 0.6);
  CHECK(share < 0.8);
}

TEST_CASE("right-side cues") {
  SynthConfig cfg = Small(1.0);
  cfg.cue_side = CueSide::kRight;
  auto corpus = GenerateSynthCorpus(cfg);
  for (const auto& m : corpus.mentions) CHECK(m.cue_sentence > m.sentence);
}

TEST_CASE("rate 0: sentence-local labels") {
  auto corpus = GenerateSynthCorpus(Small(0.0));
  std::map<std::string, std::set<std::string>> by_form;
  for (const auto& m : corpus.mentions) {
    CHECK_FALSE(m.context_dependent);
    by_form[m.form].insert(m.category);
  }
  for (const auto& [form, cats] : by_form) CHECK(cats.size() == 1);
  auto vocab = SubwordVocabulary::BuildFromDataset(corpus.dataset);
  for (Strategy s : kInferenceStrategies) {
    CHECK(ComputeBayesBound(corpus, Packer(s), vocab).all_mentions == 1.0);
  }
}

TEST_CASE("rate 1: ambiguous forms carry several categories") {
  auto corpus = GenerateSynthCorpus(Small(1.0));
  std::map<std::string, std::set<std::string>> by_form;
  for (const auto& m : corpus.mentions) by_form[m.form].insert(m.category);
  for (const auto& [form, cats] : by_form) CHECK(cats.size() >= 2);

  auto vocab = SubwordVocabulary::BuildFromDataset(corpus.dataset);
  auto single = ComputeBayesBound(corpus, Packer(Strategy::kSingle), vocab);
  CHECK(single.ambiguous_mentions >= 0.5);
  CHECK(single.ambiguous_mentions < 0.6);
  auto context = ComputeBayesBound(corpus, Packer(Strategy::kContext), vocab);
  CHECK(context.ambiguous_mentions == 1.0);
  CHECK(context.all_mentions == 1.0);
}

TEST_CASE("context minus single gap") {
  for (double rate : {0.3, 0.7}) {
    for (int distance : {1, 2, 3}) {
      SynthConfig cfg = Small(rate);
      cfg.cue_distance = distance;
      auto corpus = GenerateSynthCorpus(cfg);
      auto vocab = SubwordVocabulary::BuildFromDataset(corpus.dataset);
      const double s =
          ComputeBayesBound(corpus, Packer(Strategy::kSingle), vocab).all_mentions;
      const double c =
          ComputeBayesBound(corpus, Packer(Strategy::kContext), vocab).all_mentions;
      CHECK(c - s > 0.0);
    }
  }
  auto corpus = GenerateSynthCorpus(Small(0.7));
  auto vocab = SubwordVocabulary::BuildFromDataset(corpus.dataset);
  CHECK_THROWS_AS(ComputeBayesBound(corpus, Packer(Strategy::kUnion), vocab),
                  Error);
}

TEST_CASE("biased ambiguous forms") {
  SynthConfig cfg = Small(1.0);
  cfg.ambiguous_bias = 0.8;
  auto corpus = GenerateSynthCorpus(cfg);
  auto vocab = SubwordVocabulary::BuildFromDataset(corpus.dataset);
  const double s =
      ComputeBayesBound(corpus, Packer(Strategy::kSingle), vocab).ambiguous_mentions;
  CHECK(s > 0.7);
  CHECK(s < 0.9);
}
