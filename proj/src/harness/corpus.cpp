#include "harness/corpus.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "core/errors.hpp"
#include "harness/parallel.hpp"
#include "search/run_search.hpp"
#include "tracecodec/empirical.hpp"
#include "tracecodec/vocab.hpp"

namespace treebandit {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Same constants as fnv1a64(), fed incrementally.
struct Fnv1a {
  std::uint64_t h = 14695981039346656037ULL;
  void update(std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  }
  std::string hex() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

struct Generated {
  std::string text;
  CorpusRecord meta;
};

Vocab corpus_vocab(const ExperimentConfig& cfg) {
  if (cfg.family == Family::Tree) return Vocab::empirical_tree(cfg.tree.branching, cfg.tree.depth, cfg.budget);
  return Vocab::empirical_nav(cfg.nav.width, cfg.nav.height, cfg.budget);
}

std::vector<Generated> traces_for(const ExperimentConfig& cfg, const InstanceEntry& e, const Vocab& vocab) {
  std::vector<Generated> out;
  const RngStream base = RngStream(cfg.seed, "trace").split(e.id);
  for (const Policy& p : cfg.policies) {
    const std::string pname = policy_name(p);
    for (int k = 0; k < cfg.traces_per_instance; ++k) {
      const auto tree = e.instance.make_tree();
      const SearchRun run =
          run_search(*tree, SearchConfig{cfg.budget, p, cfg.estimator}, base.split(pname).split(static_cast<std::uint64_t>(k)));
      const TraceRecord rec = encode_empirical(run.trajectory, *tree);
      Generated g;
      g.text = render(rec);
      g.meta.instance_id = e.id;
      g.meta.trace = k;
      g.meta.policy = pname;
      g.meta.split = e.split;
      g.meta.selections = static_cast<int>(run.trajectory.selections());
      g.meta.tokens = vocab.encode(rec).size();
      out.push_back(std::move(g));
    }
  }
  return out;
}

json record_json(const CorpusRecord& r) {
  return {{"file", r.file},     {"offset", r.offset},         {"length", r.length},
          {"instance", r.instance_id}, {"trace", r.trace},    {"policy", r.policy},
          {"split", split_name(r.split)}, {"selections", r.selections}, {"tokens", r.tokens}};
}

}  // namespace

json CorpusManifest::to_json() const {
  json fl = json::array();
  for (const auto& f : files) {
    fl.push_back({{"path", f.path},
                  {"split", split_name(f.split)},
                  {"records", f.records},
                  {"bytes", f.bytes},
                  {"checksum", f.checksum}});
  }
  json rl = json::array();
  for (const auto& r : records) rl.push_back(record_json(r));
  return {{"format", format_name(format)}, {"config", config},  {"instances", instances_file},
          {"vocab", vocab_file},           {"files", fl},       {"records", rl}};
}

CorpusManifest CorpusManifest::from_json(const json& j) {
  CorpusManifest m;
  try {
    m.format = parse_format(j.at("format").get<std::string>());
    m.config = j.at("config");
    m.instances_file = j.at("instances").get<std::string>();
    m.vocab_file = j.at("vocab").get<std::string>();
    for (const auto& f : j.at("files")) {
      m.files.push_back({f.at("path").get<std::string>(), parse_split(f.at("split").get<std::string>()),
                         f.at("records").get<std::size_t>(), f.at("bytes").get<std::uint64_t>(),
                         f.at("checksum").get<std::string>()});
    }
    for (const auto& r : j.at("records")) {
      CorpusRecord c;
      c.file = r.at("file").get<std::string>();
      c.offset = r.at("offset").get<std::uint64_t>();
      c.length = r.at("length").get<std::uint64_t>();
      c.instance_id = r.at("instance").get<std::string>();
      c.trace = r.at("trace").get<int>();
      c.policy = r.at("policy").get<std::string>();
      c.split = parse_split(r.at("split").get<std::string>());
      c.selections = r.at("selections").get<int>();
      c.tokens = r.at("tokens").get<std::size_t>();
      m.records.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed corpus manifest: ") + e.what());
  }
  return m;
}

void CorpusManifest::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << to_json().dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

CorpusManifest CorpusManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return from_json(j);
}

CorpusManifest gen_corpus(const ExperimentConfig& cfg, const std::string& dir) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());

  std::vector<InstanceEntry> entries = generate_instances(cfg);
  save_instances((fs::path(dir) / "instances.json").string(), cfg, entries);
  std::erase_if(entries, [](const InstanceEntry& e) { return e.split == Split::Test; });

  const Vocab vocab = corpus_vocab(cfg);
  {
    std::ofstream out(fs::path(dir) / "vocab.json");
    out << vocab.to_json().dump(1) << '\n';
    if (!out) throw IoError("write failed: " + (fs::path(dir) / "vocab.json").string());
  }

  CorpusManifest m;
  m.format = cfg.family == Family::Tree ? TraceFormat::EmpiricalTree : TraceFormat::EmpiricalNav;
  m.config = cfg.recorded_json();
  m.instances_file = "instances.json";
  m.vocab_file = "vocab.json";

  struct Sink {
    CorpusFile file;
    std::ofstream out;
    Fnv1a hash;
  };
  std::map<Split, Sink> sinks;
  for (Split s : {Split::Train, Split::Val}) {
    Sink& k = sinks[s];
    k.file.path = "corpus-" + std::string(split_name(s)) + ".txt";
    k.file.split = s;
    k.out.open(fs::path(dir) / k.file.path, std::ios::binary);
    if (!k.out) throw IoError("cannot write " + (fs::path(dir) / k.file.path).string());
  }

  // Generate in parallel chunks and append in instance order.
  const std::size_t chunk = 8 * static_cast<std::size_t>(resolve_threads(cfg.threads));
  for (std::size_t lo = 0; lo < entries.size(); lo += chunk) {
    const std::size_t hi = std::min(entries.size(), lo + chunk);
    std::vector<std::vector<Generated>> batch(hi - lo);
    parallel_for(hi - lo, cfg.threads, [&](std::size_t i) { batch[i] = traces_for(cfg, entries[lo + i], vocab); });
    for (auto& gens : batch) {
      for (auto& g : gens) {
        Sink& k = sinks.at(g.meta.split);
        if (k.file.records > 0) {
          k.out << '\n';
          k.hash.update("\n");
          k.file.bytes += 1;
        }
        g.meta.file = k.file.path;
        g.meta.offset = k.file.bytes;
        g.meta.length = g.text.size();
        k.out << g.text;
        k.hash.update(g.text);
        k.file.bytes += g.text.size();
        k.file.records += 1;
        m.records.push_back(std::move(g.meta));
      }
    }
  }
  for (auto& [s, k] : sinks) {
    k.out.close();
    if (!k.out) throw IoError("write failed: " + k.file.path);
    k.file.checksum = k.hash.hex();
    m.files.push_back(k.file);
  }
  m.save((fs::path(dir) / kManifestName).string());
  return m;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  Fnv1a h;
  std::string buf(1 << 16, '\0');
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
  }
  return h.hex();
}

void verify_corpus(const std::string& manifest_path) {
  const CorpusManifest m = CorpusManifest::load(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::map<std::string, const CorpusFile*> by_path;
  for (const auto& f : m.files) {
    const std::string got = file_checksum((dir / f.path).string());
    if (got != f.checksum) throw InvariantViolation(f.path + ": checksum " + got + " does not match " + f.checksum);
    by_path[f.path] = &f;
  }
  std::map<std::string, Split> instance_split;
  for (const auto& r : m.records) {
    const auto it = by_path.find(r.file);
    if (it == by_path.end()) throw StructuralError("record refers to unknown file " + r.file);
    if (r.offset + r.length > it->second->bytes) throw StructuralError("record range outside " + r.file);
    if (r.split != it->second->split) throw StructuralError("record split differs from its file's split");
    const auto [pos, fresh] = instance_split.emplace(r.instance_id, r.split);
    if (!fresh && pos->second != r.split) throw StructuralError("instance " + r.instance_id + " spans two splits");
  }
}

std::string read_record(const std::string& manifest_path, const CorpusRecord& r) {
  const fs::path p = fs::path(manifest_path).parent_path() / r.file;
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  in.seekg(static_cast<std::streamoff>(r.offset));
  std::string s(r.length, '\0');
  in.read(s.data(), static_cast<std::streamsize>(r.length));
  if (static_cast<std::uint64_t>(in.gcount()) != r.length) throw IoError("short read in " + p.string());
  return s;
}

}  // namespace treebandit
