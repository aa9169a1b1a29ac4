#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "wmcp/author.hpp"
#include "wmcp/codec.hpp"
#include "wmcp/harness.hpp"
#include "wmcp/secure.hpp"
#include "wmcp/text.hpp"

namespace wmcp::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kSeedEnv = "WMCP_KEY_SEED";
constexpr std::string_view kJweKeyEnv = "WMCP_JWE_KEY";
constexpr std::string_view kTokenEnv = "WMCP_AGENT_TOKEN";

struct Options {
  bool json = false;
  std::string out;
  std::string key;
  std::string key_id = "dev";
  std::string pins = "keys/pins.txt";
  std::string sig;
  std::string digest;
  std::string registry = "fixtures/site/registry.json";
  std::string fixtures = "fixtures/site/scenarios.json";
  std::string token;
  std::string subject;
  std::vector<std::string> scopes;
  std::int64_t ttl = 300;
  int port = 0;
  int iterations = 15;
  std::uint64_t seed = 1;
  std::vector<std::string> positional;
};

std::optional<std::string> env(std::string_view name) {
  const char* v = std::getenv(std::string(name).c_str());
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

crypto::Seed load_seed(const Options& o) {
  if (!o.key.empty()) return sig::parse_seed(harness::read_file(o.key));
  if (const auto v = env(kSeedEnv)) return sig::parse_seed(*v);
  return sig::parse_seed(harness::read_file("keys/" + o.key_id + ".seed"));
}

crypto::SymmetricKey load_jwe_key(const Options& o) {
  std::string text;
  if (!o.key.empty()) {
    text = harness::read_file(o.key);
  } else if (const auto v = env(kJweKeyEnv)) {
    text = *v;
  } else {
    text = harness::read_file("keys/" + o.key_id + ".jwe.key");
  }
  const auto bytes = codec::base64_decode(text::trim(text));
  if (!bytes) throw Error(ErrorCode::InvalidArgument, "JWE key is not base64");
  if (bytes->size() != crypto::SymmetricKey{}.size()) throw Error(ErrorCode::BadKeyLength, "JWE key must be 32 bytes");
  return crypto::fixed_key<32>(*bytes);
}

// Seed from --key or the environment; the JWE key always comes from a file
// beside it (or ./keys).
harness::Keys load_keys(const Options& o) {
  const fs::path dir = o.key.empty() ? fs::path("keys") : fs::path(o.key).parent_path();
  harness::Keys keys;
  keys.key_id = o.key_id;
  keys.seed = load_seed(o);
  const auto jwe = codec::base64_decode(text::trim(harness::read_file(dir / (o.key_id + ".jwe.key"))));
  if (!jwe || jwe->size() != keys.jwe_key.size()) throw Error(ErrorCode::BadKeyLength, "bad JWE key in " + dir.string());
  std::copy(jwe->begin(), jwe->end(), keys.jwe_key.begin());
  return keys;
}

std::string load_token(const Options& o) {
  if (!o.token.empty()) return std::string(text::trim(harness::read_file(o.token)));
  if (const auto v = env(kTokenEnv)) return std::string(text::trim(*v));
  throw Error(ErrorCode::InvalidArgument, "no agent token: pass --token <file> or set " + std::string(kTokenEnv));
}

void emit(const Options& o, std::ostream& out, const std::string& bytes) {
  if (o.out.empty()) {
    out << bytes;
    return;
  }
  std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
  f << bytes;
  if (!f.flush()) throw Error(ErrorCode::IoFailure, "cannot write " + o.out);
}

std::int64_t unix_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

int scan(const Options& o, std::ostream& out) {
  const auto suggestion = author::scan_html(harness::read_file(o.positional.at(0)));
  if (o.json) {
    emit(o, out, to_json(suggestion).dump(2) + "\n");
    return 0;
  }
  emit(o, out, serialize_document(suggestion.document));
  for (const auto& n : suggestion.confidence_notes) out << "note " << n.selector << ": " << n.note << "\n";
  return 0;
}

int lint(const Options& o, std::ostream& out) {
  const auto report = author::lint_document(harness::read_file(o.positional.at(0)));
  out << (o.json ? to_json(report).dump(2) + "\n" : author::to_text(report));
  return report.ok() ? 0 : 1;
}

int sign(const Options& o, std::ostream& out) {
  const auto& path = o.positional.at(0);
  const auto bundle = sig::sign_bundle(harness::read_file(path), load_seed(o), o.key_id);
  Options target = o;
  if (target.out.empty()) target.out = path + std::string(sig::kSignatureSuffix);
  emit(target, out, sig::encode_signature(bundle) + "\n");
  out << "signed " << path << " with " << o.key_id << " -> " << target.out << "\n";
  return 0;
}

int verify(const Options& o, std::ostream& out) {
  const auto& path = o.positional.at(0);
  const auto sig_path = o.sig.empty() ? path + std::string(sig::kSignatureSuffix) : o.sig;
  const auto bundle = sig::decode_signature(text::trim(harness::read_file(sig_path)), harness::read_file(path));
  const auto pins = sig::TrustStore::load(harness::read_file(o.pins));
  const auto doc = sig::load_verified(bundle, pins);
  if (o.json) {
    out << nlohmann::ordered_json({{"ok", true}, {"key_id", bundle.key_id}, {"elements", doc.elements.size()}}).dump(2)
        << "\n";
  } else {
    out << "ok: " << path << " signed by " << bundle.key_id << ", " << doc.elements.size() << " elements\n";
  }
  return 0;
}

int encrypt(const Options& o, std::ostream& out) {
  const auto plain = harness::read_file(o.positional.at(0));
  const auto jwe = secure::encrypt_payload(
      std::span(reinterpret_cast<const std::uint8_t*>(plain.data()), plain.size()), load_jwe_key(o));
  emit(o, out, jwe.str() + "\n");
  return 0;
}

int decrypt(const Options& o, std::ostream& out) {
  const auto compact = harness::read_file(o.positional.at(0));
  const auto plain = secure::decrypt_payload(text::trim(compact), load_jwe_key(o));
  emit(o, out, std::string(plain.begin(), plain.end()));
  return 0;
}

int token(const Options& o, std::ostream& out) {
  const auto t = resolver::issue_agent_token(o.subject, o.scopes, o.ttl, load_seed(o), unix_now());
  if (o.json) {
    emit(o, out,
         nlohmann::ordered_json({{"token", t.compact},
                                 {"subject", t.claims.subject},
                                 {"scopes", t.claims.scopes},
                                 {"issued_at", t.claims.issued_at},
                                 {"expires_at", t.claims.expires_at}})
                 .dump(2) +
             "\n");
  } else {
    emit(o, out, t.compact + "\n");
  }
  return 0;
}

int resolve(const Options& o, std::ostream& out) {
  const auto registry = resolver::EndpointRegistry::load(harness::read_file(o.registry),
                                                         crypto::ed25519_public_key(load_seed(o)));
  const auto& symbol = o.positional.at(0);
  try {
    const auto& url = resolver::resolve_endpoint(symbol, load_token(o), registry, unix_now());
    out << (o.json ? nlohmann::ordered_json({{"symbol", symbol}, {"url", url}}).dump(2) : url) << "\n";
    return 0;
  } catch (const Error& e) {
    if (!o.json) throw;
    out << nlohmann::ordered_json({{"symbol", symbol},
                                   {"error", to_string(e.code())},
                                   {"status", resolver::http_status(e.code())},
                                   {"message", e.what()}})
               .dump(2)
        << "\n";
    return 1;
  }
}

int drift(const Options& o, std::ostream& out) {
  const auto& doc_path = o.positional.at(0);
  if (o.positional.size() < 2) throw CLI::ValidationError("drift needs <document> <html>");
  const auto doc = parse_document(harness::read_file(doc_path));
  std::optional<author::RegistryDigest> digest;
  if (!o.digest.empty()) digest = author::RegistryDigest::parse(harness::read_file(o.digest));
  std::optional<std::string> key_id;
  const auto sig_path = doc_path + std::string(sig::kSignatureSuffix);
  if (fs::exists(sig_path)) {
    key_id = sig::decode_signature(text::trim(harness::read_file(sig_path)), "").key_id;
  }
  const auto report = author::check_drift(doc, harness::read_file(o.positional[1]), digest, key_id);
  out << (o.json ? to_json(report).dump(2) + "\n" : author::to_text(report));
  return report.ok() ? 0 : 1;
}

struct Site {
  std::vector<harness::ScenarioFixture> scenarios;
  resolver::EndpointRegistry registry;
  harness::Keys keys;
};

Site load_site(const Options& o) {
  Site s;
  s.keys = load_keys(o);
  s.scenarios = harness::load_scenarios(o.fixtures);
  const auto registry = fs::path(o.fixtures).parent_path() / "registry.json";
  s.registry = resolver::EndpointRegistry::load(harness::read_file(registry), crypto::ed25519_public_key(s.keys.seed));
  return s;
}

std::atomic<bool> g_stop{false};

int serve(const Options& o, std::ostream& out) {
  auto site = load_site(o);
  harness::OriginOptions options;
  options.port = o.port;
  const auto origin = harness::Origin::start(std::move(site.scenarios), std::move(site.registry), site.keys, options);
  out << "serving " << origin->base_url() << " (Ctrl-C to stop)" << std::endl;
  g_stop = false;
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  origin->stop();
  return 0;
}

int bench(const Options& o, std::ostream& out) {
  if (o.iterations < 1) throw CLI::ValidationError("--iterations must be at least 1");
  auto site = load_site(o);
  harness::AgentOptions agent;
  agent.pins = sig::TrustStore::load(harness::read_file(o.pins));
  harness::OriginOptions origin_options;
  origin_options.port = o.port;
  const auto scenarios = site.scenarios;
  const auto origin = harness::Origin::start(std::move(site.scenarios), std::move(site.registry), site.keys,
                                             origin_options);
  harness::BenchOptions options;
  options.iterations = o.iterations;
  options.seed = o.seed;
  const auto records = harness::run_benchmark(scenarios, origin->base_url(), agent, options);
  origin->stop();

  const auto rows = harness::summarize(records);
  const fs::path path = o.out.empty() ? "results.csv" : o.out;
  harness::write_results(path, records);
  if (o.json) {
    auto j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      j.push_back({{"scenario", r.scenario},
                   {"baseline_mean_tokens", r.baseline_mean_tokens},
                   {"webmcp_mean_tokens", r.webmcp_mean_tokens},
                   {"reduction_pct", r.reduction_pct},
                   {"baseline_success_rate", r.baseline_success_rate},
                   {"webmcp_success_rate", r.webmcp_success_rate}});
    }
    out << j.dump(2) << "\n";
  } else {
    out << harness::summary_csv(rows);
    out << "wrote " << records.size() << " rows to " << path.string() << " and " << harness::summary_path(path).string()
        << "\n";
  }
  const bool all_ok = std::all_of(records.begin(), records.end(), [](const auto& r) { return r.success; });
  return all_ok ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"webMCP authoring, signing and benchmark toolkit", "wmcp"};
  app.require_subcommand(1);
  Options o;

  const auto key_help = "key file (default ./keys/<id>.seed, or $" + std::string(kSeedEnv) + ")";
  auto add_json = [&](CLI::App* sub) { sub->add_flag("--json", o.json, "machine-readable output"); };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "write the result to this path"); };
  auto add_file = [&](CLI::App* sub, const char* name, const char* help) {
    sub->add_option(name, o.positional, help)->required()->expected(1);
  };

  auto* scan_cmd = app.add_subcommand("scan", "suggest a draft document for an HTML page");
  add_file(scan_cmd, "html", "HTML file");
  add_json(scan_cmd);
  add_out(scan_cmd);

  auto* lint_cmd = app.add_subcommand("lint", "check a document against the schema and lint rules");
  add_file(lint_cmd, "document", ".wmcp file");
  add_json(lint_cmd);

  auto* sign_cmd = app.add_subcommand("sign", "write a detached Ed25519 signature (<document>.sig)");
  add_file(sign_cmd, "document", ".wmcp file");
  sign_cmd->add_option("--key", o.key, key_help);
  sign_cmd->add_option("--key-id", o.key_id, "key id recorded in the signature");
  add_out(sign_cmd);

  auto* verify_cmd = app.add_subcommand("verify", "verify a detached signature, then parse");
  add_file(verify_cmd, "document", ".wmcp file");
  verify_cmd->add_option("--sig", o.sig, "signature file (default <document>.sig)");
  verify_cmd->add_option("--pins", o.pins, "pin file (default ./keys/pins.txt)");
  add_json(verify_cmd);

  auto* encrypt_cmd = app.add_subcommand("encrypt", "encrypt a payload to a compact JWE (dir, A256GCM)");
  add_file(encrypt_cmd, "plaintext", "file to encrypt");
  encrypt_cmd->add_option("--key", o.key, "base64 key file (default ./keys/dev.jwe.key, or $" + std::string(kJweKeyEnv) + ")");
  add_out(encrypt_cmd);

  auto* decrypt_cmd = app.add_subcommand("decrypt", "decrypt a compact JWE");
  add_file(decrypt_cmd, "jwe", "file holding the compact JWE");
  decrypt_cmd->add_option("--key", o.key, "base64 key file (default ./keys/dev.jwe.key, or $" + std::string(kJweKeyEnv) + ")");
  add_out(decrypt_cmd);

  auto* token_cmd = app.add_subcommand("token", "issue a scoped agent token");
  token_cmd->add_option("--subject", o.subject, "token subject")->required();
  token_cmd->add_option("--scope", o.scopes, "scope, repeatable");
  token_cmd->add_option("--ttl", o.ttl, "lifetime in seconds")->check(CLI::PositiveNumber);
  token_cmd->add_option("--key", o.key, key_help);
  add_json(token_cmd);
  add_out(token_cmd);

  auto* resolve_cmd = app.add_subcommand("resolve", "resolve a symbolic endpoint with an agent token");
  add_file(resolve_cmd, "symbol", "@NAME");
  resolve_cmd->add_option("--token", o.token, "file holding the agent token (or $" + std::string(kTokenEnv) + ")");
  resolve_cmd->add_option("--registry", o.registry, "endpoint registry JSON");
  resolve_cmd->add_option("--key", o.key, key_help);
  add_json(resolve_cmd);

  auto* drift_cmd = app.add_subcommand("drift", "compare a document with deployed HTML and policy");
  drift_cmd->add_option("files", o.positional, "<document> <html>")->required()->expected(2);
  drift_cmd->add_option("--digest", o.digest, "registry digest JSON (scopes, csrf_header, key_ids)");
  add_json(drift_cmd);

  auto* serve_cmd = app.add_subcommand("serve", "run the mock origin over the bundled site");
  serve_cmd->add_option("--port", o.port, "port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--fixtures", o.fixtures, "scenario manifest");
  serve_cmd->add_option("--key", o.key, key_help);

  auto* bench_cmd = app.add_subcommand("bench", "run both agents over every scenario and write CSV");
  bench_cmd->add_option("--iterations", o.iterations, "iterations per scenario and method");
  bench_cmd->add_option("--seed", o.seed, "method-order shuffle seed");
  bench_cmd->add_option("--port", o.port, "origin port (0 picks a free one)")->check(CLI::Range(0, 65535));
  bench_cmd->add_option("--fixtures", o.fixtures, "scenario manifest");
  bench_cmd->add_option("--pins", o.pins, "pin file (default ./keys/pins.txt)");
  bench_cmd->add_option("--key", o.key, key_help);
  add_json(bench_cmd);
  add_out(bench_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const auto code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const std::vector<std::pair<CLI::App*, int (*)(const Options&, std::ostream&)>> commands = {
      {scan_cmd, scan},       {lint_cmd, lint},   {sign_cmd, sign},       {verify_cmd, verify},
      {encrypt_cmd, encrypt}, {decrypt_cmd, decrypt}, {token_cmd, token}, {resolve_cmd, resolve},
      {drift_cmd, drift},     {serve_cmd, serve}, {bench_cmd, bench}};
  try {
    for (const auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn(o, out);
    }
    return 2;
  } catch (const CLI::ValidationError& e) {
    err << "usage: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace wmcp::cli
