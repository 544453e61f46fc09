// Copyright 2026 The mbsp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "mbsp/combine.h"
#include "mbsp/common.h"
#include "mbsp/config.h"
#include "mbsp/corpus.h"
#include "mbsp/eval.h"
#include "mbsp/features.h"
#include "mbsp/mbl.h"
#include "mbsp/pipeline.h"
#include "mbsp/synth.h"

namespace mbsp::cli {

namespace {

using pipeline::SpanSets;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  size_t workers = 0;  // 0: not given
  std::optional<uint64_t> seed;
  std::string columns;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_path, "configuration file");
  sub->add_option("--set", c.overrides, "override a configuration key (section.key=value)");
  sub->add_option("-j,--workers", c.workers, "worker threads");
  sub->add_option("--columns", c.columns, "column roles, e.g. word,pos,chunk");
}

config::Settings load_settings(const Common& c) {
  config::Settings s;
  const size_t hw = std::max(1u, std::thread::hardware_concurrency());
  s.workers = hw;
  s.pipeline.workers = hw;
  s.eval.workers = hw;
  config::KeyValues values;
  if (!c.config_path.empty()) values = config::parse_file(c.config_path);
  for (const auto& o : c.overrides) {
    auto [k, v] = config::parse_assignment(o);
    values[k] = v;
  }
  if (c.workers) values["run.workers"] = std::to_string(c.workers);
  if (c.seed) values["run.seed"] = std::to_string(*c.seed);
  config::apply(values, s);
  return s;
}

io::ColumnRoles roles_for(const io::Corpus& corpus, const Common& c) {
  return c.columns.empty() ? io::ColumnRoles::for_corpus(corpus) : io::ColumnRoles::parse(c.columns);
}

std::vector<Sentence> strip_chunks(std::vector<Sentence> sentences) {
  for (auto& s : sentences) {
    for (auto& t : s) t.chunk.reset();
  }
  return sentences;
}

// Writes `tags` into the role column (appending a column if the corpus has
// none) and returns the updated corpus.
io::Corpus set_column(io::Corpus corpus, std::optional<size_t> index, const std::string& role,
                      const std::vector<std::vector<std::string>>& tags) {
  const size_t width = corpus.columns();
  const size_t col = index ? *index : width;
  for (size_t s = 0; s < corpus.sentences.size(); ++s) {
    for (size_t i = 0; i < corpus.sentences[s].size(); ++i) {
      auto& row = corpus.sentences[s][i];
      if (col < row.size()) {
        row[col] = tags[s][i];
      } else {
        row.push_back(tags[s][i]);
      }
    }
  }
  if (!corpus.header.empty() && !index) corpus.header.push_back(role);
  return corpus;
}

std::vector<std::vector<std::string>> iob_tags(const SpanSets& spans, const std::vector<Sentence>& sentences) {
  std::vector<std::vector<std::string>> out;
  for (size_t s = 0; s < sentences.size(); ++s) {
    out.push_back(repr::encode(spans[s], repr::Scheme::kIOB2, sentences[s].size()));
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

// Bracket marks as they appear in column files.
std::string column_mark(const std::string& tag) {
  if (tag.empty()) return tag;
  std::string out = tag;
  if (out.front() == '[') out.front() = '(';
  if (out.front() == ']') out.front() = ')';
  return out;
}

void write_chunk_trace(const std::string& path, const std::vector<Sentence>& sentences,
                       const pipeline::ChunkTrace& trace, const pipeline::PipelineConfig& cfg) {
  std::vector<std::string> header{"word", "pos"};
  for (auto r : cfg.representations) {
    header.push_back(pipeline::to_string(r) + ":O");
    header.push_back(pipeline::to_string(r) + ":C");
  }
  header.push_back("vote:O");
  header.push_back("vote:C");
  io::Corpus c;
  c.separator = '\t';
  c.header = header;
  for (size_t s = 0; s < sentences.size(); ++s) {
    std::vector<io::Row> rows;
    for (size_t i = 0; i < sentences[s].size(); ++i) {
      io::Row row{sentences[s][i].word, sentences[s][i].pos};
      for (size_t r = 0; r < cfg.representations.size(); ++r) {
        row.push_back(column_mark(trace.open_streams[s][r][i]));
        row.push_back(column_mark(trace.close_streams[s][r][i]));
      }
      row.push_back(column_mark(trace.voted_open[s][i]));
      row.push_back(column_mark(trace.voted_close[s][i]));
      rows.push_back(std::move(row));
    }
    c.sentences.push_back(std::move(rows));
  }
  io::write_corpus_file(c, path);
}

pipeline::WarningSink warner(std::ostream& err) {
  return [&err](const std::string& w) { err << "warning: " << w << '\n'; };
}

std::string phrase_trees(const std::vector<Sentence>& sentences,
                         const std::vector<std::vector<pipeline::Phrase>>& phrases) {
  std::string out;
  for (size_t s = 0; s < sentences.size(); ++s) {
    const auto node = pipeline::build_tree(sentences[s], phrases[s]);
    out += pipeline::tree_to_string(node);
    out += '\n';
  }
  return out;
}

// Spans of the requested kind from a found or gold file.
SpanSets read_spans(const std::string& path, const std::string& task, const Common& c,
                    std::vector<size_t>* lengths) {
  SpanSets out;
  if (task == "tree") {
    for (const auto& t : io::read_trees_file(path)) {
      out.push_back(t.phrases);
      std::sort(out.back().begin(), out.back().end());
      if (lengths) lengths->push_back(t.tokens.size());
    }
    return out;
  }
  const auto corpus = io::read_corpus_file(path);
  const auto roles = roles_for(corpus, c);
  if (task == "chunk") {
    out = io::chunk_spans(corpus, roles);
  } else if (task == "clause") {
    for (const auto& forest : io::clause_forests(corpus, roles)) {
      std::vector<repr::ChunkSpan> spans;
      for (const auto& [s, e] : repr::flatten(forest)) spans.push_back({s, e, "S"});
      out.push_back(std::move(spans));
    }
  } else {
    throw ConfigError("unknown evaluation task '" + task + "' (chunk, clause, tree)");
  }
  if (lengths) {
    for (const auto& s : corpus.sentences) lengths->push_back(s.size());
  }
  return out;
}

void check_same_lengths(const std::vector<size_t>& a, const std::vector<size_t>& b) {
  if (a.size() != b.size()) {
    throw DomainError("gold has " + std::to_string(a.size()) + " sentences, found has " + std::to_string(b.size()));
  }
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) throw DomainError("sentence " + std::to_string(i + 1) + " differs in length");
  }
}

std::pair<size_t, size_t> parse_range(const std::string& text) {
  const size_t dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const size_t v = std::stoul(text);
      return {v, v};
    }
    const size_t a = std::stoul(text.substr(0, dots)), b = std::stoul(text.substr(dots + 2));
    if (a > b) throw ConfigError("empty range '" + text + "'");
    return {a, b};
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad range '" + text + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("bad range '" + text + "'");
  }
}

// ---------------------------------------------------------------------------
// Commands

int cmd_synth(const std::string& dir, size_t n_train, size_t n_test, uint64_t seed, double noise, size_t depth,
              std::ostream& out) {
  std::filesystem::create_directories(dir);
  synth::GrammarOptions opt;
  opt.pos_noise = noise;
  opt.max_depth = depth;
  const auto train = synth::generate_trees(n_train, seed, opt);
  const auto test = synth::generate_trees(n_test, seed + 1, opt);
  auto path = [&](const std::string& name) { return (std::filesystem::path(dir) / name).string(); };
  io::write_corpus_file(synth::np_chunk_corpus(train), path("np_train.txt"));
  io::write_corpus_file(synth::np_chunk_corpus(test), path("np_test.txt"));
  io::write_corpus_file(synth::typed_chunk_corpus(train), path("chunk_train.txt"));
  io::write_corpus_file(synth::typed_chunk_corpus(test), path("chunk_test.txt"));
  io::write_corpus_file(synth::clause_corpus(train), path("clause_train.txt"));
  io::write_corpus_file(synth::clause_corpus(test), path("clause_test.txt"));
  std::string trees_train, trees_test;
  for (const auto& t : train) trees_train += io::format_tree(t) + "\n";
  for (const auto& t : test) trees_test += io::format_tree(t) + "\n";
  write_text(path("trees_train.txt"), trees_train);
  write_text(path("trees_test.txt"), trees_test);
  out << "wrote " << n_train << " training and " << n_test << " test sentences to " << dir << '\n';
  return kExitOk;
}

int cmd_train(const Common& c, const std::string& task, const std::string& input, const std::string& model_path,
              bool update, std::ostream& out, std::ostream& err) {
  const auto s = load_settings(c);
  for (const auto& w : s.pipeline.validate()) err << "warning: " << w << '\n';
  pipeline::ModelBundle bundle;
  if (update && std::filesystem::exists(model_path)) bundle = pipeline::load_bundle_file(model_path);
  const auto& cfg = s.pipeline;

  if (task == "np" || task == "typed" || task == "clauses") {
    const auto corpus = io::read_corpus_file(input);
    const auto roles = roles_for(corpus, c);
    const auto sentences = io::to_sentences(corpus, roles);
    if (task == "np") {
      bundle.np = pipeline::train_chunker_with_combiner(strip_chunks(sentences), io::chunk_spans(corpus, roles), cfg,
                                                        s.selection_folds);
    } else if (task == "typed") {
      bundle.typed = pipeline::train_typed_chunker(strip_chunks(sentences), io::chunk_spans(corpus, roles), cfg,
                                                   cfg.type_strategy, warner(err));
    } else {
      bundle.clauses = pipeline::train_clause_models(sentences, io::clause_forests(corpus, roles), cfg);
    }
    out << "trained " << task << " models on " << sentences.size() << " sentences\n";
  } else if (task == "parse-np" || task == "parse") {
    const auto trees = io::read_trees_file(input);
    std::vector<Sentence> sentences;
    SpanSets base, phrases;
    for (const auto& t : trees) {
      sentences.push_back(t.tokens);
      auto b = io::base_phrases(t);
      if (task == "parse-np") {
        std::erase_if(b, [](const repr::ChunkSpan& sp) { return sp.type != "NP"; });
        phrases.push_back(io::phrases_labelled(t, {"NP"}));
      } else {
        phrases.push_back(t.phrases);
      }
      base.push_back(std::move(b));
    }
    if (task == "parse-np") {
      bundle.np = pipeline::train_chunker(sentences, base, cfg);
      bundle.np_levels = pipeline::train_level_models(sentences, phrases, cfg, cfg.np_parse_levels - 1);
      out << "trained NP chunker and " << bundle.np_levels.size() << " NP levels on " << sentences.size()
          << " trees\n";
    } else {
      bundle.typed = pipeline::train_typed_chunker(sentences, base, cfg, cfg.type_strategy, warner(err));
      bundle.parse_levels = pipeline::train_level_models(sentences, phrases, cfg, cfg.max_parse_levels - 1);
      out << "trained typed chunker and " << bundle.parse_levels.size() << " parse levels on "
          << sentences.size() << " trees\n";
    }
  } else {
    throw ConfigError("unknown training task '" + task + "' (np, typed, clauses, parse-np, parse)");
  }
  pipeline::save_bundle_file(bundle, model_path);
  return kExitOk;
}

int cmd_chunk(const Common& c, bool typed, const std::string& model_path, const std::string& input,
              const std::string& output, const std::string& dump, std::ostream& err) {
  const auto s = load_settings(c);
  const auto bundle = pipeline::load_bundle_file(model_path);
  const auto corpus = io::read_corpus_file(input);
  const auto roles = roles_for(corpus, c);
  const auto sentences = strip_chunks(io::to_sentences(corpus, roles));
  SpanSets spans;
  if (typed) {
    if (!bundle.typed) throw ConfigError("model bundle has no typed chunker");
    spans = pipeline::chunk_typed(sentences, *bundle.typed, s.pipeline, warner(err));
  } else {
    if (!bundle.np) throw ConfigError("model bundle has no NP chunker");
    pipeline::ChunkTrace trace;
    spans = pipeline::chunk_np(sentences, *bundle.np, s.pipeline, dump.empty() ? nullptr : &trace);
    if (!dump.empty()) write_chunk_trace(dump, sentences, trace, s.pipeline);
  }
  io::write_corpus_file(set_column(corpus, roles.chunk, "chunk", iob_tags(spans, sentences)), output);
  return kExitOk;
}

int cmd_clauses(const Common& c, const std::string& model_path, const std::string& input, const std::string& output) {
  const auto s = load_settings(c);
  const auto bundle = pipeline::load_bundle_file(model_path);
  if (!bundle.clauses) throw ConfigError("model bundle has no clause models");
  const auto corpus = io::read_corpus_file(input);
  const auto roles = roles_for(corpus, c);
  if (!roles.chunk) throw DomainError("clause identification needs a chunk column");
  const auto sentences = io::to_sentences(corpus, roles);
  const auto forests = pipeline::identify_clauses(sentences, *bundle.clauses, s.workers);
  std::vector<std::vector<std::string>> column;
  for (size_t i = 0; i < sentences.size(); ++i) column.push_back(io::clause_column(forests[i], sentences[i].size()));
  io::write_corpus_file(set_column(corpus, roles.clause, "clause", column), output);
  return kExitOk;
}

int cmd_parse(const Common& c, bool np_only, const std::string& model_path, const std::string& input,
              const std::string& output, std::ostream& err) {
  const auto s = load_settings(c);
  const auto bundle = pipeline::load_bundle_file(model_path);
  const auto corpus = io::read_corpus_file(input);
  const auto sentences = strip_chunks(io::to_sentences(corpus, roles_for(corpus, c)));
  std::vector<std::vector<pipeline::Phrase>> phrases;
  if (np_only) {
    if (!bundle.np) throw ConfigError("model bundle has no NP chunker");
    const auto chunker = [&](const std::vector<Sentence>& ss) { return pipeline::chunk_np(ss, *bundle.np, s.pipeline); };
    auto base = chunker(sentences);
    for (auto& spans : base) {
      for (auto& sp : spans) {
        if (sp.type.empty()) sp.type = "NP";
      }
    }
    phrases = pipeline::run_cascade(sentences, base, bundle.np_levels, s.pipeline.np_parse_levels, s.pipeline,
                                    warner(err))
                  .phrases;
  } else {
    if (!bundle.typed) throw ConfigError("model bundle has no typed chunker");
    const auto chunker = [&](const std::vector<Sentence>& ss) {
      return pipeline::chunk_typed(ss, *bundle.typed, s.pipeline, warner(err));
    };
    phrases = pipeline::parse_full(sentences, chunker, bundle.parse_levels, s.pipeline, warner(err)).phrases;
  }
  write_text(output, phrase_trees(sentences, phrases));
  return kExitOk;
}

int cmd_evaluate(const Common& c, const std::string& gold, const std::string& found, const std::string& task,
                 const std::string& format, bool bootstrap, size_t samples, std::ostream& out) {
  auto s = load_settings(c);
  if (samples) s.eval.bootstrap_samples = samples;
  std::vector<size_t> gl, fl;
  const auto g = read_spans(gold, task, c, &gl);
  const auto f = read_spans(found, task, c, &fl);
  check_same_lengths(gl, fl);
  if (bootstrap) {
    const auto r = eval::bootstrap(f, g, s.eval);
    out << std::fixed << std::setprecision(2);
    out << "point\t" << r.point << "\nmean\t" << r.mean << "\nstddev\t" << r.stddev << "\nlower\t" << r.lower
        << "\nupper\t" << r.upper << "\nsamples\t" << r.samples.size() << '\n';
    return kExitOk;
  }
  const auto report = eval::score(f, g, s.eval);
  if (format == "lines") {
    out << eval::format_lines(report);
  } else if (format == "table") {
    out << eval::format_table(report, s.eval.beta);
  } else {
    throw ConfigError("unknown report format '" + format + "' (table, lines)");
  }
  return kExitOk;
}

int cmd_select(const Common& c, const std::string& input, const std::string& scheme_name, int pass,
               size_t limit, std::ostream& out) {
  const auto s = load_settings(c);
  const auto corpus = io::read_corpus_file(input);
  const auto roles = roles_for(corpus, c);
  auto sentences = strip_chunks(io::to_sentences(corpus, roles));
  auto gold = io::chunk_spans(corpus, roles);
  if (limit && sentences.size() > limit) {
    sentences.resize(limit);
    gold.resize(limit);
  }
  const auto scheme = repr::scheme_from_string(scheme_name);
  if (pass != 1 && pass != 2) throw ConfigError("--pass must be 1 or 2");
  const size_t folds = s.selection_folds;
  if (sentences.size() < folds) throw DomainError("fewer sentences than cross-validation folds");

  pipeline::TagSequences targets;
  for (size_t i = 0; i < sentences.size(); ++i) targets.push_back(repr::encode(gold[i], scheme, sentences[i].size()));
  const auto& first_template = s.pipeline.pass1.at(scheme);

  // Bracket streams are scored on bracket positions; IO schemes on chunks.
  auto spans_of = [&](const std::vector<std::string>& tags) {
    if (repr::is_io_scheme(scheme)) return repr::decode(tags, scheme);
    std::vector<repr::ChunkSpan> marks;
    for (size_t i = 0; i < tags.size(); ++i) {
      if (tags[i] != repr::kNoBracket) marks.push_back({i, i, tags[i]});
    }
    return marks;
  };

  auto scorer = [&](const features::FeatureTemplate& tmpl) {
    if (tmpl.empty()) return 0.0;
    SpanSets found(sentences.size()), expected(sentences.size());
    for (size_t f = 0; f < folds; ++f) {
      std::vector<Sentence> tr, te;
      pipeline::TagSequences trt;
      std::vector<size_t> te_index;
      for (size_t i = 0; i < sentences.size(); ++i) {
        if (i % folds == f) {
          te.push_back(sentences[i]);
          te_index.push_back(i);
        } else {
          Sentence sent = sentences[i];
          if (pass == 2) {
            for (size_t k = 0; k < sent.size(); ++k) sent[k].chunk = targets[i][k];
          }
          tr.push_back(std::move(sent));
          trt.push_back(targets[i]);
        }
      }
      std::shared_ptr<pipeline::MemoryTagger> first;
      if (pass == 2) first = pipeline::train_tagger(tr, trt, first_template, s.pipeline.chunk_learner);
      const auto tagger = pipeline::train_tagger(tr, trt, tmpl, s.pipeline.chunk_learner);
      for (size_t k = 0; k < te.size(); ++k) {
        Sentence sent = te[k];
        if (pass == 2) {
          const auto ctx = first->tag(sent);
          for (size_t t = 0; t < sent.size(); ++t) sent[t].chunk = ctx[t];
        }
        found[te_index[k]] = spans_of(tagger->tag(sent));
        expected[te_index[k]] = spans_of(targets[te_index[k]]);
      }
    }
    return eval::score(found, expected, s.eval).overall.f;
  };

  std::vector<features::Feature> candidates;
  for (int o = -features::kMaxOffset; o <= features::kMaxOffset; ++o) {
    candidates.push_back({features::Channel::kWord, o});
    candidates.push_back({features::Channel::kPos, o});
    if (pass == 2 && o != 0) candidates.push_back({features::Channel::kChunk, o});
  }
  const auto report = features::select_features(candidates, scorer, s.selection);
  out << "best\t" << report.best_set.to_string() << '\t' << std::fixed << std::setprecision(2) << report.best_score
      << '\n';
  for (const auto& step : report.score_history) {
    out << "step\t" << step.tmpl.to_string() << '\t' << step.score << '\n';
  }
  out << "evaluations\t" << report.evaluations << "\nsweeps\t" << report.sweeps << '\n';
  return kExitOk;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto& p : split(text, ',')) {
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

std::vector<std::string> flat_column(const io::Corpus& corpus, const io::ColumnRoles& roles,
                                     std::vector<size_t>* lengths) {
  if (!roles.chunk) throw ConfigError("system output has no chunk column");
  std::vector<std::string> out;
  for (const auto& s : corpus.sentences) {
    if (lengths) lengths->push_back(s.size());
    for (const auto& row : s) out.push_back(row.at(*roles.chunk));
  }
  return out;
}

combine::SystemOutputs load_outputs(const std::vector<std::string>& paths, const std::string& gold_path,
                                    const Common& c, std::vector<size_t>* lengths, io::Corpus* first) {
  combine::SystemOutputs outputs;
  std::vector<size_t> reference;
  for (size_t i = 0; i < paths.size(); ++i) {
    const auto corpus = io::read_corpus_file(paths[i]);
    std::vector<size_t> l;
    outputs.systems.push_back(flat_column(corpus, roles_for(corpus, c), &l));
    if (i == 0) {
      reference = l;
      if (first) *first = corpus;
    } else {
      check_same_lengths(reference, l);
    }
  }
  if (!gold_path.empty()) {
    const auto corpus = io::read_corpus_file(gold_path);
    std::vector<size_t> l;
    outputs.gold = flat_column(corpus, roles_for(corpus, c), &l);
    check_same_lengths(reference, l);
  }
  if (lengths) *lengths = reference;
  return outputs;
}

int cmd_combine(const Common& c, const std::string& systems, const std::string& method_name,
                const std::string& tuning, const std::string& tuning_gold, const std::string& weights_in,
                const std::string& weights_out, const std::string& output, std::ostream& out) {
  const auto s = load_settings(c);
  const auto paths = split_list(systems);
  if (paths.empty()) throw ConfigError("--systems needs at least one file");
  combine::CombinerWeights weights;
  if (!weights_in.empty()) {
    std::ifstream in(weights_in);
    if (!in) throw IoError("cannot open weights '" + weights_in + "'");
    weights = combine::load_weights(in);
  } else {
    const auto method = method_name.empty() ? s.pipeline.combiner : combine::method_from_string(method_name);
    if (method == combine::Method::kMajority) {
      weights.method = method;
      weights.num_systems = paths.size();
    } else {
      if (tuning.empty() || tuning_gold.empty()) {
        throw ConfigError("method " + combine::to_string(method) + " needs --tuning and --tuning-gold");
      }
      const auto tpaths = split_list(tuning);
      if (tpaths.size() != paths.size()) throw ConfigError("--tuning must list one file per system");
      weights = combine::fit_weights(load_outputs(tpaths, tuning_gold, c, nullptr, nullptr), method);
    }
  }
  if (!weights_out.empty()) {
    std::ofstream wo(weights_out);
    if (!wo) throw IoError("cannot write weights '" + weights_out + "'");
    combine::save_weights(weights, wo);
  }
  std::vector<size_t> lengths;
  io::Corpus first;
  const auto outputs = load_outputs(paths, "", c, &lengths, &first);
  const auto combined = combine::combine(outputs, weights);
  std::vector<std::vector<std::string>> tags;
  size_t at = 0;
  for (size_t len : lengths) {
    tags.emplace_back(combined.begin() + static_cast<std::ptrdiff_t>(at),
                      combined.begin() + static_cast<std::ptrdiff_t>(at + len));
    at += len;
  }
  const auto roles = roles_for(first, c);
  io::write_corpus_file(set_column(first, roles.chunk, "chunk", tags), output);
  out << "combined " << paths.size() << " systems with " << combine::to_string(weights.method) << '\n';
  return kExitOk;
}

int cmd_xor(const Common& c, const std::string& extra, size_t runs, std::ostream& out) {
  const auto s = load_settings(c);
  const auto [lo, hi] = parse_range(extra);
  if (runs == 0) throw ConfigError("--runs must be positive");
  out << "extra\tmean_correct\tstddev\n";
  for (size_t e = lo; e <= hi; ++e) {
    const auto r = mbl::xor_experiment(e, runs, s.seed + e, s.xor_learner);
    out << e << '\t' << std::fixed << std::setprecision(2) << r.mean_correct << '\t' << r.stddev << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Memory-based shallow parsing"};
  app.require_subcommand(1);
  Common common;

  std::string task, input, output, model, dump, gold, found, format = "table", eval_task = "chunk";
  std::string systems, method, tuning, tuning_gold, weights_in, weights_out, scheme = "IOB1", extra = "0..10";
  std::string dir = "data";
  bool update = false;
  size_t samples = 0, runs = 200, n_train = 500, n_test = 200, depth = 3, limit = 0;
  int pass = 1;
  double noise = 0.08;
  uint64_t seed = 0;

  auto* synth_cmd = app.add_subcommand("synth", "write synthetic corpora");
  synth_cmd->add_option("-o,--out-dir", dir, "output directory");
  synth_cmd->add_option("--train", n_train, "training sentences");
  synth_cmd->add_option("--test", n_test, "test sentences");
  synth_cmd->add_option("--seed", seed, "generator seed");
  synth_cmd->add_option("--noise", noise, "POS noise probability");
  synth_cmd->add_option("--depth", depth, "recursion depth");

  auto* train = app.add_subcommand("train", "train models into a bundle");
  add_common(train, common);
  train->add_option("-t,--task", task, "np, typed, clauses, parse-np or parse")->required();
  train->add_option("-i,--input", input, "training corpus or tree file")->required();
  train->add_option("-m,--model", model, "model bundle to write")->required();
  train->add_flag("--update", update, "add to an existing bundle");

  auto* chunk = app.add_subcommand("chunk", "NP chunking");
  auto* chunk_typed = app.add_subcommand("chunk-typed", "typed chunking");
  for (auto* sub : {chunk, chunk_typed}) {
    add_common(sub, common);
    sub->add_option("-m,--model", model, "model bundle")->required();
    sub->add_option("-i,--input", input, "input corpus")->required();
    sub->add_option("-o,--output", output, "output corpus")->required();
  }
  chunk->add_option("--dump", dump, "write intermediate bracket streams");

  auto* clauses = app.add_subcommand("clauses", "clause identification");
  auto* parse_np = app.add_subcommand("parse-np", "nested NP parsing");
  auto* parse = app.add_subcommand("parse", "full parsing");
  for (auto* sub : {clauses, parse_np, parse}) {
    add_common(sub, common);
    sub->add_option("-m,--model", model, "model bundle")->required();
    sub->add_option("-i,--input", input, "input corpus")->required();
    sub->add_option("-o,--output", output, "output file")->required();
  }

  auto* evaluate = app.add_subcommand("evaluate", "score found against gold");
  auto* bootstrap = app.add_subcommand("bootstrap", "bootstrap confidence interval of F");
  for (auto* sub : {evaluate, bootstrap}) {
    add_common(sub, common);
    sub->add_option("-g,--gold", gold, "gold file")->required();
    sub->add_option("-f,--found", found, "system output")->required();
    sub->add_option("--task", eval_task, "chunk, clause or tree");
  }
  evaluate->add_option("--format", format, "table or lines");
  bootstrap->add_option("--samples", samples, "number of resamples");

  auto* select = app.add_subcommand("select-features", "wrapper feature selection");
  add_common(select, common);
  select->add_option("-i,--input", input, "training corpus")->required();
  select->add_option("--scheme", scheme, "tag scheme");
  select->add_option("--pass", pass, "1 or 2");
  select->add_option("--limit", limit, "use at most this many sentences");

  auto* comb = app.add_subcommand("combine", "combine system outputs");
  add_common(comb, common);
  comb->add_option("--systems", systems, "comma-separated system outputs")->required();
  comb->add_option("--method", method, "combination method");
  comb->add_option("--tuning", tuning, "comma-separated tuning outputs");
  comb->add_option("--tuning-gold", tuning_gold, "tuning gold");
  comb->add_option("--weights-in", weights_in, "load fitted weights");
  comb->add_option("--weights-out", weights_out, "save fitted weights");
  comb->add_option("-o,--output", output, "combined output")->required();

  auto* xor_cmd = app.add_subcommand("xor-experiment", "XOR with irrelevant features");
  add_common(xor_cmd, common);
  xor_cmd->add_option("--extra", extra, "number of random features, N or A..B");
  xor_cmd->add_option("--runs", runs, "runs per setting");
  xor_cmd->add_option("--seed", seed, "random seed");

  auto* show = app.add_subcommand("show-config", "print the effective configuration");
  add_common(show, common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitDomain;
  }

  try {
    if (xor_cmd->parsed() && xor_cmd->count("--seed")) common.seed = seed;
    if (synth_cmd->parsed()) return cmd_synth(dir, n_train, n_test, seed, noise, depth, out);
    if (train->parsed()) return cmd_train(common, task, input, model, update, out, err);
    if (chunk->parsed()) return cmd_chunk(common, false, model, input, output, dump, err);
    if (chunk_typed->parsed()) return cmd_chunk(common, true, model, input, output, "", err);
    if (clauses->parsed()) return cmd_clauses(common, model, input, output);
    if (parse_np->parsed()) return cmd_parse(common, true, model, input, output, err);
    if (parse->parsed()) return cmd_parse(common, false, model, input, output, err);
    if (evaluate->parsed()) return cmd_evaluate(common, gold, found, eval_task, format, false, 0, out);
    if (bootstrap->parsed()) return cmd_evaluate(common, gold, found, eval_task, format, true, samples, out);
    if (select->parsed()) return cmd_select(common, input, scheme, pass, limit, out);
    if (comb->parsed()) {
      return cmd_combine(common, systems, method, tuning, tuning_gold, weights_in, weights_out, output, out);
    }
    if (xor_cmd->parsed()) return cmd_xor(common, extra, runs, out);
    if (show->parsed()) {
      out << config::render(load_settings(common));
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitDomain;
}

}  // namespace mbsp::cli
