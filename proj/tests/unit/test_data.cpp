#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "causalign/batching.hpp"
#include "causalign/error.hpp"
#include "causalign/manifest.hpp"
#include "causalign/png_io.hpp"
#include "causalign/synthetic.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"

using namespace causalign;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

double mean_intensity(const SynthCorpus& corpus, Domain domain) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& c : corpus.clips)
    if (c.domain == domain)
      for (const auto& f : c.frames)
        for (double v : f.data()) {
          sum += v;
          ++n;
        }
  return sum / static_cast<double>(n);
}

}  // namespace

TEST_CASE("png round trip") {
  TempDir dir("png");
  Rng rng(1);
  const ImageTensor img = quantize_8bit(oracle::random_image(5, 7, 3, rng));
  write_png(img, dir / "a.png");
  const ImageTensor back = read_png(dir / "a.png");
  CHECK(oracle::pixels(back) == oracle::pixels(img));
  CHECK_THROWS_AS(read_png(dir / "missing.png"), IoError);
  CHECK_THROWS_AS(write_png(ImageTensor(2, 2, 1, 0.5), dir / "grey.png"), ValidationError);
}

TEST_CASE("default corpus layout") {
  const SynthCorpus corpus = render_synthetic(SynthSpec{});
  CHECK(corpus.class_names == std::vector<std::string>{"DS", "KT", "ND"});
  CHECK(corpus.clips.size() == 60);
  const ClipDataset src = corpus.dataset(DomainFilter::kSource);
  const ClipDataset tgt = corpus.dataset(DomainFilter::kTarget);
  CHECK(src.size() == 30);
  CHECK(tgt.size() == 30);
  for (const auto& c : corpus.clips) {
    CHECK(c.frames.size() == 4);
    CHECK(c.frames[0].height() == 32);
  }
}

TEST_CASE("renditions share geometry and differ in brightness") {
  const SynthSpec spec;
  const SynthCorpus corpus = render_synthetic(spec);
  for (std::size_t i = 0; i + 1 < corpus.clips.size(); i += 2) {
    const auto& s = corpus.clips[i];
    const auto& t = corpus.clips[i + 1];
    REQUIRE(s.domain == Domain::kSource);
    REQUIRE(t.domain == Domain::kTarget);
    CHECK(s.base_id == t.base_id);
    CHECK(s.label == t.label);
    CHECK(s.masks == t.masks);
  }
  const double gap = mean_intensity(corpus, Domain::kTarget) - mean_intensity(corpus, Domain::kSource);
  CHECK(std::abs(gap) >= spec.target_style.brightness_bias - spec.source_style.brightness_bias);
}

TEST_CASE("generated corpus on disk") {
  TempDir a("gen_a"), b("gen_b");
  SynthSpec spec;
  spec.seed = 77;
  const Manifest m = generate_synthetic(spec, a.path());
  generate_synthetic(spec, b.path());
  const Manifest loaded = load_manifest(a / "manifest.tsv");
  CHECK(loaded.entries == m.entries);
  CHECK(loaded.entries.size() == 60);
  std::size_t pngs = 0;
  for (const auto& e : loaded.entries)
    for (const auto& f : e.frames) {
      ++pngs;
      CHECK(slurp(loaded.resolve(f)) == slurp(b.path() / f));
    }
  CHECK(pngs == 240);
  CHECK(slurp(a / "manifest.tsv") == slurp(b / "manifest.tsv"));

  // Decoded frames equal the in-memory rendering.
  const SynthCorpus corpus = render_synthetic(spec);
  const ClipDataset all = load_clips(loaded, DomainFilter::kAll);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t f = 0; f < all.clips[i].size(); ++f)
      CHECK(oracle::pixels(all.clips[i][f]) == oracle::pixels(corpus.clips[i].frames[f]));

  spec.seed = 78;
  TempDir c("gen_c");
  generate_synthetic(spec, c.path());
  CHECK(slurp(a.path() / loaded.entries[0].frames[0]) != slurp(c.path() / loaded.entries[0].frames[0]));
}

TEST_CASE("manifest round trip and errors") {
  TempDir dir("manifest");
  Rng rng(2);
  write_png(quantize_8bit(oracle::random_image(4, 4, 3, rng)), dir / "f0.png");
  write_png(quantize_8bit(oracle::random_image(4, 4, 3, rng)), dir / "f1.png");
  Manifest m;
  m.class_names = {"DS", "KT"};
  m.entries = {{"a", 0, Domain::kSource, {"f0.png", "f1.png"}}, {"b", 1, Domain::kTarget, {"f1.png"}}};
  write_manifest(m, dir / "m.tsv");
  const Manifest back = load_manifest(dir / "m.tsv");
  CHECK(back.class_names == m.class_names);
  CHECK(back.entries == m.entries);

  auto parse_error = [](const std::string& text) -> std::string {
    try {
      parse_manifest(text, ".");
    } catch (const ValidationError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(parse_error("classes\tDS\n").find("empty manifest") != std::string::npos);
  CHECK(parse_error("classes\tDS\na\t0\tsource\tx.png\na\t0\tsource\ty.png\n").find("line 3") != std::string::npos);
  CHECK(parse_error("classes\tDS\na\t4\tsource\tx.png\n").find("line 2") != std::string::npos);
  CHECK(parse_error("classes\tDS\na\t0\tsideways\tx.png\n").find("line 2") != std::string::npos);
  CHECK(parse_error("classes\tDS\na\t0\tsource\n").find("line 2") != std::string::npos);

  fs::remove(dir / "f1.png");
  try {
    load_manifest(dir / "m.tsv");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("f1.png") != std::string::npos);
  }
  CHECK_THROWS_AS(load_clips(m, DomainFilter::kSource), IoError);
}

TEST_CASE("domain filters") {
  Manifest m;
  m.class_names = {"a"};
  m.entries = {{"x", 0, Domain::kSource, {"f"}}, {"y", 0, Domain::kTarget, {"f"}}};
  CHECK(m.select(DomainFilter::kSource) == std::vector<std::size_t>{0});
  CHECK(m.select(DomainFilter::kTarget) == std::vector<std::size_t>{1});
  CHECK(m.select(DomainFilter::kAll).size() == 2);
  CHECK_THROWS_AS(parse_domain_filter("both"), ValidationError);
  Rng rng(3);
  Manifest only_src = m;
  only_src.entries.pop_back();
  CHECK_THROWS_AS(make_batches(only_src, 2, rng, DomainFilter::kTarget), ValidationError);
}

TEST_CASE("batching: partner rule") {
  Rng rng(4);
  const std::vector<int> labels{0, 0, 1, 1};
  for (int t = 0; t < 50; ++t) {
    const auto batches = make_batches(labels, 4, rng);
    REQUIRE(batches.size() == 1);
    const Batch& b = batches[0];
    for (std::size_t i = 0; i < 4; ++i) CHECK(b.labels[b.partner[i]] != b.labels[i]);
  }
  const auto single = make_batches(std::vector<int>{2}, 4, rng);
  CHECK(single[0].self_partnered);
  CHECK(single[0].partner[0] == 0);

  const auto same = make_batches(std::vector<int>{1, 1, 1}, 3, rng);
  for (std::size_t i = 0; i < 3; ++i) CHECK(same[0].partner[i] != i);

  for (int t = 0; t < 100; ++t) {
    std::vector<int> l(1 + rng.below(40));
    for (auto& v : l) v = static_cast<int>(rng.below(3));
    const int bs = 1 + static_cast<int>(rng.below(10));
    const auto batches = make_batches(l, bs, rng);
    std::multiset<std::size_t> seen;
    for (std::size_t k = 0; k < batches.size(); ++k) {
      const Batch& b = batches[k];
      if (k + 1 < batches.size()) CHECK(b.size() == static_cast<std::size_t>(bs));
      std::set<int> distinct(b.labels.begin(), b.labels.end());
      for (std::size_t i = 0; i < b.size(); ++i) {
        seen.insert(b.items[i]);
        CHECK(b.labels[i] == l[b.items[i]]);
        if (b.size() > 1) CHECK(b.partner[i] != i);
        if (distinct.size() > 1) CHECK(b.labels[b.partner[i]] != b.labels[i]);
      }
    }
    CHECK(seen.size() == l.size());
    for (std::size_t i = 0; i < l.size(); ++i) CHECK(seen.count(i) == 1);
  }
}

TEST_CASE("batching: shuffle reaches every first position") {
  Rng rng(5);
  const std::vector<int> labels{0, 1, 2, 0, 1, 2};
  std::set<std::size_t> first;
  for (int t = 0; t < 1000; ++t) first.insert(make_batches(labels, 6, rng)[0].items[0]);
  CHECK(first.size() == 6);
}

TEST_CASE("rng streams") {
  Rng a(9), b(9);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  const Rng base(9);
  Rng s1 = base.split(3), s2 = base.split(3), s3 = base.split(4);
  CHECK(s1.next_u64() == s2.next_u64());
  CHECK(s1.next_u64() != s3.next_u64());
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(a.below(7) < 7);
  }
}
