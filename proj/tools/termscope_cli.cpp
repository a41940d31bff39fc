// termscope command-line front end. Talks to the library only through the C
// interface. Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "termscope/termscope.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct DataError {
  std::string message;
};

void check(ts_status s) {
  if (s != TS_OK) throw DataError{ts_last_error_message()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError{"Io: cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Calls fn(object) for each non-blank JSONL line.
template <class Fn>
void each_jsonl(const std::string& text, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::exception& e) {
      throw DataError{"ParseError: line " + std::to_string(no) + ": " + e.what()};
    }
    if (!obj.is_object()) throw DataError{"ParseError: line " + std::to_string(no) + ": not an object"};
    fn(obj, no);
  }
}

std::string take_string(char* s) {
  std::string out(s);
  ts_string_free(s);
  return out;
}

struct EmbeddingPtr {
  ts_embedding* p = nullptr;
  ~EmbeddingPtr() { ts_embedding_free(p); }
};

struct PoolPtr {
  ts_pool* p = nullptr;
  ~PoolPtr() { ts_pool_free(p); }
};

unsigned threads_or_env(unsigned flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("TERMSCOPE_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return unsigned(v);
  }
  return 0;
}

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

Json span_json(const ts_span& s) {
  Json j;
  j["start_frame"] = s.start_frame;
  j["len_frames"] = s.len_frames;
  j["start_sec"] = s.start_sec;
  j["end_sec"] = s.end_sec;
  return j;
}

Json stats_line(const Json& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "mean %.3f ms  median %.3f ms  p99 %.3f ms",
                s.at("mean_ms").get<double>(), s.at("median_ms").get<double>(),
                s.at("p99_ms").get<double>());
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Terminology clip localization and retrieval"};
  app.require_subcommand(1);
  bool json = false;
  unsigned threads_flag = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--json", json, "Structured JSON on stdout");
  };
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", threads_flag, "Worker cap (default: TERMSCOPE_THREADS or 1)")
        ->check(CLI::PositiveNumber);
  };

  // build-kb
  std::string kb_table, kb_clips, kb_out;
  auto* build_kb = app.add_subcommand("build-kb", "Validate a terminology table and write it with resolved paths");
  build_kb->add_option("--table", kb_table, "Terminology table JSONL")->required();
  build_kb->add_option("--clip-manifest", kb_clips, "Clip manifest JSONL");
  build_kb->add_option("--out", kb_out, "Output JSONL")->required();
  add_common(build_kb);

  // retrieve
  std::string rt_pool, rt_clips, rt_utt, rt_pooling = "sliding-max";
  std::size_t rt_k = 5;
  auto* retrieve = app.add_subcommand("retrieve", "Top-k terminology triplets for one utterance");
  retrieve->add_option("--pool", rt_pool, "Terminology table JSONL")->required();
  retrieve->add_option("--clip-manifest", rt_clips, "Clip manifest JSONL");
  retrieve->add_option("--utterance", rt_utt, "Utterance .semb")->required();
  retrieve->add_option("--k", rt_k, "Number of hits")->check(CLI::PositiveNumber);
  retrieve->add_option("--pooling", rt_pooling, "sliding-max | whole-max | whole-min | whole-avg");
  add_common(retrieve);
  add_threads(retrieve);

  // locate
  std::string lc_utt, lc_clip, lc_wav, lc_out_wav, lc_out_semb;
  auto* locate = app.add_subcommand("locate", "Best-matching window of a clip inside an utterance");
  locate->add_option("--utterance", lc_utt, "Utterance .semb")->required();
  locate->add_option("--clip", lc_clip, "Clip .semb")->required();
  locate->add_option("--utterance-wav", lc_wav, "Utterance audio (PCM16 mono WAV)");
  locate->add_option("--out-wav", lc_out_wav, "Write the located audio here");
  locate->add_option("--out-semb", lc_out_semb, "Write the located embedding rows here");
  add_common(locate);

  // slice
  std::string sl_wav, sl_out;
  double sl_start = 0, sl_end = 0;
  auto* slice = app.add_subcommand("slice", "Cut [start, end) seconds out of a WAV file");
  slice->add_option("--wav", sl_wav, "Input WAV")->required();
  slice->add_option("--start", sl_start, "Start second")->required();
  slice->add_option("--end", sl_end, "End second")->required();
  slice->add_option("--out", sl_out, "Output WAV")->required();
  add_common(slice);

  // prompt
  std::string pr_spec, pr_style = "locate-focus", pr_src = "English", pr_tgt = "Chinese", pr_utt;
  std::vector<std::string> pr_items;
  auto* prompt = app.add_subcommand("prompt", "Assemble an instruction prompt");
  prompt->add_option("--spec", pr_spec, "Prompt spec JSON file");
  prompt->add_option("--style", pr_style, "locate-focus | salm | retrieve-demonstrate");
  prompt->add_option("--src", pr_src, "Source language");
  prompt->add_option("--tgt", pr_tgt, "Target language");
  prompt->add_option("--utterance-audio", pr_utt, "Utterance audio path");
  prompt->add_option("--item", pr_items, "term|audio|translation (repeatable)");
  add_common(prompt);

  // tag-refs
  std::string tg_input;
  auto* tag_refs = app.add_subcommand("tag-refs", "Insert <Term> tags into references");
  tag_refs->add_option("--input", tg_input, "JSONL {utterance_id, reference, term_translations}")->required();
  add_common(tag_refs);

  // strip-tags
  std::string st_text, st_input;
  auto* strip = app.add_subcommand("strip-tags", "Remove <Term> tags");
  auto* st_text_opt = strip->add_option("--text", st_text, "Text to strip");
  strip->add_option("--input", st_input, "File to strip")->excludes(st_text_opt);
  add_common(strip);

  // filter-asr
  std::string fa_term, fa_transcript, fa_input;
  std::size_t fa_max = 3;
  auto* filter = app.add_subcommand("filter-asr", "Keep terms whose ASR transcript is within the edit-distance limit");
  filter->add_option("--term", fa_term, "Terminology text");
  filter->add_option("--transcript", fa_transcript, "ASR transcript");
  filter->add_option("--input", fa_input, "JSONL {term, transcript, ...}");
  filter->add_option("--max-distance", fa_max, "Largest kept distance");
  add_common(filter);

  // eval-hits
  std::string eh_cases;
  std::vector<std::size_t> eh_n{1, 5, 10};
  auto* eval_hits = app.add_subcommand("eval-hits", "Hits@N over retrieval cases");
  eval_hits->add_option("--cases", eh_cases, "JSONL {utterance_id, gold_triplet_ids, ranked_ids}")->required();
  eval_hits->add_option("--n", eh_n, "Cut-offs (repeatable)")->check(CLI::PositiveNumber);
  add_common(eval_hits);

  // eval-tsr
  std::string et_cases;
  auto* eval_tsr = app.add_subcommand("eval-tsr", "Term success rate over hypotheses");
  eval_tsr->add_option("--cases", et_cases, "JSONL {utterance_id, hypothesis, term_targets}")->required();
  add_common(eval_tsr);

  // loss
  std::optional<double> ls_pos;
  std::vector<double> ls_negs;
  std::string ls_cases;
  auto* loss = app.add_subcommand("loss", "Contrastive loss value");
  loss->add_option("--pos", ls_pos, "Positive similarity");
  loss->add_option("--neg", ls_negs, "Negative similarity (repeatable)");
  loss->add_option("--cases", ls_cases, "JSONL {sim_pos, sim_negs}");
  add_common(loss);

  // run
  std::string rn_config;
  auto* run = app.add_subcommand("run", "Process a corpus end to end");
  run->add_option("--config", rn_config, "Config file (JSON or key = value)")->required();
  add_common(run);
  add_threads(run);

  // bench
  ts_bench_options bo;
  ts_bench_default_options(&bo);
  auto* bench = app.add_subcommand("bench", "Latency of naive vs optimized retrieval");
  bench->add_option("--pool-size", bo.pool_size, "Clips in the pool")->check(CLI::PositiveNumber);
  bench->add_option("--frames", bo.frames, "Utterance frames")->check(CLI::PositiveNumber);
  bench->add_option("--dim", bo.dim, "Embedding dim")->check(CLI::PositiveNumber);
  bench->add_option("--clip-frames", bo.clip_frames, "Clip frames")->check(CLI::PositiveNumber);
  bench->add_option("--warmup", bo.warmup, "Warmup iterations");
  bench->add_option("--iterations", bo.iterations, "Measured iterations")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bo.seed, "RNG seed");
  add_common(bench);
  add_threads(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }
  const unsigned threads = threads_or_env(threads_flag);

  try {
    if (*build_kb) {
      std::size_t n = 0;
      std::uint32_t dim = 0;
      check(ts_build_kb(kb_table.c_str(), kb_clips.empty() ? nullptr : kb_clips.c_str(),
                        kb_out.c_str(), &n, &dim));
      if (json) {
        emit(Json{{"triplets", n}, {"dim", dim}, {"out", kb_out}});
      } else {
        std::cout << "wrote " << n << " triplets (dim " << dim << ") to " << kb_out << "\n";
      }
    } else if (*retrieve) {
      ts_pooling mode;
      if (ts_parse_pooling(rt_pooling.c_str(), &mode) != TS_OK) {
        std::cerr << ts_last_error_message() << "\n" << retrieve->help();
        return kUsageError;
      }
      PoolPtr pool;
      check(ts_pool_load(rt_pool.c_str(), rt_clips.empty() ? nullptr : rt_clips.c_str(), &pool.p));
      EmbeddingPtr u;
      check(ts_embedding_read(rt_utt.c_str(), &u.p));
      std::vector<ts_hit> hits(std::min(rt_k, ts_pool_size(pool.p)));
      std::size_t count = 0;
      check(ts_retrieve_topk(u.p, pool.p, rt_k, mode, threads ? threads : 1, hits.data(),
                             hits.size(), &count));
      Json all = Json::array();
      for (std::size_t i = 0; i < count; ++i) {
        const ts_hit& h = hits[i];
        ts_span span;
        check(ts_frames_to_span(h.result.best_window_start, h.result.window_len,
                                ts_embedding_frame_duration_us(u.p), &span));
        Json j;
        j["rank"] = h.rank;
        j["triplet_id"] = ts_pool_triplet_id(pool.p, h.pool_index);
        j["term"] = ts_pool_triplet_term(pool.p, h.pool_index);
        j["translation"] = ts_pool_triplet_translation(pool.p, h.pool_index);
        j["score"] = h.result.score;
        j["best_window_start"] = h.result.best_window_start;
        j["window_len"] = h.result.window_len;
        j["start_sec"] = span.start_sec;
        j["end_sec"] = span.end_sec;
        if (json) {
          all.push_back(std::move(j));
        } else {
          std::cout << j.dump() << "\n";
        }
      }
      if (json) emit(all);
    } else if (*locate) {
      EmbeddingPtr u, c;
      check(ts_embedding_read(lc_utt.c_str(), &u.p));
      check(ts_embedding_read(lc_clip.c_str(), &c.p));
      ts_similarity sim;
      ts_span span;
      check(ts_locate(u.p, c.p, lc_wav.empty() ? nullptr : lc_wav.c_str(),
                      lc_out_wav.empty() ? nullptr : lc_out_wav.c_str(),
                      lc_out_semb.empty() ? nullptr : lc_out_semb.c_str(), &sim, &span));
      if (json) {
        Json j = span_json(span);
        j["score"] = sim.score;
        emit(j);
      } else {
        std::printf("frames [%u, %u)  seconds [%.3f, %.3f)  score %.6f\n", span.start_frame,
                    span.start_frame + span.len_frames, span.start_sec, span.end_sec, sim.score);
      }
    } else if (*slice) {
      std::uint64_t samples = 0;
      check(ts_slice_audio(sl_wav.c_str(), sl_start, sl_end, sl_out.c_str(), &samples));
      if (json) {
        emit(Json{{"samples", samples}, {"out", sl_out}});
      } else {
        std::cout << "wrote " << samples << " samples to " << sl_out << "\n";
      }
    } else if (*prompt) {
      std::string spec;
      if (!pr_spec.empty()) {
        spec = read_file(pr_spec);
      } else {
        Json j;
        j["style"] = pr_style;
        j["src_lang"] = pr_src;
        j["tgt_lang"] = pr_tgt;
        j["utterance_audio"] = pr_utt;
        j["items"] = Json::array();
        for (const auto& item : pr_items) {
          const auto a = item.find('|');
          const auto b = a == std::string::npos ? a : item.find('|', a + 1);
          if (b == std::string::npos) {
            std::cerr << "--item expects term|audio|translation\n" << prompt->help();
            return kUsageError;
          }
          j["items"].push_back(Json{{"term", item.substr(0, a)},
                                    {"audio", item.substr(a + 1, b - a - 1)},
                                    {"translation", item.substr(b + 1)}});
        }
        spec = j.dump();
      }
      char* out = nullptr;
      check(ts_build_prompt_json(spec.c_str(), &out));
      const std::string text = take_string(out);
      if (json) {
        emit(Json{{"prompt", text}});
      } else {
        std::cout << text << "\n";
      }
    } else if (*tag_refs) {
      Json all = Json::array();
      each_jsonl(read_file(tg_input), [&](const Json& obj, std::size_t line) {
        if (!obj.contains("reference") || !obj["reference"].is_string()) {
          throw DataError{"ParseError: line " + std::to_string(line) + ": missing reference"};
        }
        std::vector<std::string> terms;
        if (obj.contains("term_translations")) terms = obj["term_translations"].get<std::vector<std::string>>();
        std::vector<const char*> ptrs;
        for (const auto& t : terms) ptrs.push_back(t.c_str());
        char* out = nullptr;
        check(ts_tag_reference(obj["reference"].get<std::string>().c_str(), ptrs.data(), ptrs.size(), &out));
        Json j;
        j["utterance_id"] = obj.value("utterance_id", std::string());
        j["tagged_reference"] = take_string(out);
        if (json) {
          all.push_back(std::move(j));
        } else {
          std::cout << j.dump() << "\n";
        }
      });
      if (json) emit(all);
    } else if (*strip) {
      const std::string text = st_input.empty() ? st_text : read_file(st_input);
      char* out = nullptr;
      check(ts_strip_tags(text.c_str(), &out));
      const std::string stripped = take_string(out);
      if (json) {
        emit(Json{{"text", stripped}});
      } else {
        std::cout << stripped << (st_input.empty() ? "\n" : "");
      }
    } else if (*filter) {
      auto decide = [&](const std::string& term, const std::string& transcript) {
        int keep = 0;
        std::size_t distance = 0;
        check(ts_asr_filter(term.c_str(), transcript.c_str(), fa_max, &keep, &distance));
        return std::pair<bool, std::size_t>(keep != 0, distance);
      };
      if (fa_input.empty()) {
        if (!filter->count("--term") || !filter->count("--transcript")) {
          std::cerr << "filter-asr needs --input or both --term and --transcript\n" << filter->help();
          return kUsageError;
        }
        const auto [keep, distance] = decide(fa_term, fa_transcript);
        if (json) {
          emit(Json{{"decision", keep ? "keep" : "discard"}, {"distance", distance}});
        } else {
          std::cout << (keep ? "keep" : "discard") << " (distance " << distance << ")\n";
        }
      } else {
        Json all = Json::array();
        std::size_t kept = 0;
        each_jsonl(read_file(fa_input), [&](const Json& obj, std::size_t line) {
          if (!obj.contains("term") || !obj.contains("transcript")) {
            throw DataError{"ParseError: line " + std::to_string(line) + ": needs term and transcript"};
          }
          const auto [keep, distance] =
              decide(obj["term"].get<std::string>(), obj["transcript"].get<std::string>());
          Json j = obj;
          j["decision"] = keep ? "keep" : "discard";
          j["distance"] = distance;
          kept += keep;
          if (json) {
            all.push_back(std::move(j));
          } else {
            std::cout << j.dump() << "\n";
          }
        });
        if (json) emit(all);
        std::cerr << kept << " kept\n";
      }
    } else if (*eval_hits) {
      const std::string cases = read_file(eh_cases);
      Json all = Json::array();
      for (std::size_t n : eh_n) {
        ts_ratio r;
        check(ts_hits_at_n(cases.c_str(), n, &r));
        all.push_back(Json{{"metric", "hits@" + std::to_string(n)},
                           {"value", r.value},
                           {"numerator", r.numerator},
                           {"denominator", r.denominator}});
        if (!json) std::printf("hits@%zu %.6f (%llu/%llu)\n", n, r.value,
                               (unsigned long long)r.numerator, (unsigned long long)r.denominator);
      }
      if (json) emit(all);
    } else if (*eval_tsr) {
      ts_ratio r;
      check(ts_term_success_rate(read_file(et_cases).c_str(), &r));
      if (json) {
        emit(Json{{"metric", "tsr"}, {"value", r.value}, {"numerator", r.numerator},
                  {"denominator", r.denominator}});
      } else {
        std::printf("tsr %.6f (%llu/%llu)\n", r.value, (unsigned long long)r.numerator,
                    (unsigned long long)r.denominator);
      }
    } else if (*loss) {
      std::vector<std::pair<double, std::vector<double>>> cases;
      if (!ls_cases.empty()) {
        each_jsonl(read_file(ls_cases), [&](const Json& obj, std::size_t line) {
          if (!obj.contains("sim_pos") || !obj["sim_pos"].is_number()) {
            throw DataError{"ParseError: line " + std::to_string(line) + ": missing sim_pos"};
          }
          cases.emplace_back(obj["sim_pos"].get<double>(),
                             obj.value("sim_negs", std::vector<double>{}));
        });
      } else if (ls_pos) {
        cases.emplace_back(*ls_pos, ls_negs);
      } else {
        std::cerr << "loss needs --pos or --cases\n" << loss->help();
        return kUsageError;
      }
      Json all = Json::array();
      for (const auto& [pos, negs] : cases) {
        double value = 0;
        check(ts_contrastive_loss(pos, negs.data(), negs.size(), &value));
        all.push_back(Json{{"loss", value}});
        if (!json) std::printf("%.17g\n", value);
      }
      if (json) emit(ls_cases.empty() ? all[0] : all);
    } else if (*run) {
      char* out = nullptr;
      check(ts_run_corpus(rn_config.c_str(), threads, &out));
      const std::string report = take_string(out);
      if (json) {
        std::cout << report;
      } else {
        const Json r = Json::parse(report);
        std::cout << "jobs " << r["jobs_ok"] << "/" << r["jobs_total"] << " ok, "
                  << r["jobs_failed"] << " failed\n";
        for (const auto& f : r["failures"]) {
          std::cout << "  " << f["utterance_id"].get<std::string>() << ": "
                    << f["error"].get<std::string>() << "\n";
        }
        for (const auto& m : r["metrics"]) {
          std::printf("%s %.6f (%llu/%llu)\n", m["metric"].get<std::string>().c_str(),
                      m["value"].get<double>(), m["numerator"].get<unsigned long long>(),
                      m["denominator"].get<unsigned long long>());
        }
      }
    } else if (*bench) {
      if (threads) bo.threads = threads;
      char* out = nullptr;
      check(ts_bench(&bo, &out));
      const Json r = Json::parse(take_string(out));
      if (json) {
        emit(r);
      } else {
        std::printf("pool %zu clips, utterance %u x %u, clip %u frames, %zu iterations\n",
                    bo.pool_size, bo.frames, bo.dim, bo.clip_frames, bo.iterations);
        const char* rows[][2] = {{"pair naive", "pair_naive"},
                                 {"pair optimized", "pair_optimized"},
                                 {"window max deque", "window_max_deque"},
                                 {"window max blocked", "window_max_blocked"},
                                 {"pool sliding-max", "pool_sliding_max"},
                                 {"pool whole-max", "pool_whole_max"}};
        for (const auto& row : rows) {
          std::printf("%-20s %s\n", row[0], stats_line(r[row[1]]).get<std::string>().c_str());
        }
        std::printf("speedup (median naive / optimized): %.2fx\n", r["speedup"].get<double>());
      }
    }
  } catch (const DataError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kDataError;
  } catch (const Json::exception& e) {
    std::cerr << "error: ParseError: " << e.what() << "\n";
    return kDataError;
  }
  return 0;
}
