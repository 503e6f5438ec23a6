#include "vvuq/campaign/store.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

#include "sqlite.hpp"
#include "vvuq/campaign/decoder.hpp"
#include "vvuq/campaign/run_protocol.hpp"
#include "vvuq/campaign/sampler_json.hpp"
#include "vvuq/campaign/template.hpp"
#include "vvuq/core/errors.hpp"
#include "vvuq/core/numeric_format.hpp"
#include "vvuq/core/process.hpp"
#include "vvuq/core/rng.hpp"

namespace vvuq::campaign {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE meta(key TEXT PRIMARY KEY, value TEXT NOT NULL);
CREATE TABLE params(
  idx INTEGER PRIMARY KEY,
  name TEXT NOT NULL UNIQUE,
  kind TEXT NOT NULL,
  default_value REAL NOT NULL,
  distribution TEXT NOT NULL);
CREATE TABLE app(
  id INTEGER PRIMARY KEY CHECK (id = 1),
  template_path TEXT NOT NULL,
  template_text TEXT NOT NULL,
  target TEXT NOT NULL,
  delimiter TEXT NOT NULL,
  command TEXT NOT NULL,
  decoder TEXT NOT NULL);
CREATE TABLE stages(
  stage_id INTEGER PRIMARY KEY,
  sampler TEXT NOT NULL,
  rng TEXT,
  seed INTEGER,
  sample_count INTEGER NOT NULL,
  first_run INTEGER NOT NULL);
CREATE TABLE runs(
  run_id INTEGER PRIMARY KEY,
  stage_id INTEGER NOT NULL REFERENCES stages(stage_id),
  weight REAL,
  status TEXT NOT NULL,
  run_dir TEXT NOT NULL,
  attempts INTEGER NOT NULL DEFAULT 0,
  exit_code INTEGER);
CREATE INDEX runs_by_status ON runs(status);
CREATE INDEX runs_by_stage ON runs(stage_id);
CREATE TABLE run_params(
  run_id INTEGER NOT NULL REFERENCES runs(run_id),
  idx INTEGER NOT NULL REFERENCES params(idx),
  value REAL NOT NULL,
  PRIMARY KEY (run_id, idx)) WITHOUT ROWID;
CREATE TABLE qoi_index(qoi TEXT PRIMARY KEY, length INTEGER NOT NULL, data BLOB NOT NULL);
CREATE TABLE qoi_values(
  run_id INTEGER NOT NULL REFERENCES runs(run_id),
  qoi TEXT NOT NULL REFERENCES qoi_index(qoi),
  data BLOB NOT NULL,
  PRIMARY KEY (run_id, qoi)) WITHOUT ROWID;
CREATE TABLE run_scores(
  run_id INTEGER NOT NULL REFERENCES runs(run_id),
  scorer TEXT NOT NULL,
  score REAL NOT NULL,
  PRIMARY KEY (run_id, scorer)) WITHOUT ROWID;
)sql";

std::string now_utc() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void configure(sql::Db& db) {
  db.exec("PRAGMA journal_mode=WAL");
  db.exec("PRAGMA synchronous=NORMAL");
  db.exec("PRAGMA foreign_keys=ON");
  sqlite3_busy_timeout(db.get(), 60000);
}

RunStatus status_of(const std::string& s, std::int64_t run_id) {
  auto st = parse_status(s);
  if (!st) throw StoreCorrupt("run " + std::to_string(run_id) + " has unknown status '" + s + "'");
  return *st;
}

std::string hex(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace

std::string run_dir_name(std::int64_t run_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%06lld", static_cast<long long>(run_id));
  return buf;
}

struct Store::Impl {
  fs::path workdir;
  mutable sql::Db db;
  CampaignConfig config;
  std::string created;

  RunRecord read_run(std::int64_t run_id) const {
    sql::Stmt st(db.get(),
                 "SELECT stage_id, weight, status, run_dir, attempts, exit_code FROM runs WHERE run_id = ?");
    st.bind(1, run_id);
    if (!st.step()) throw NotFound("no run with id " + std::to_string(run_id));
    RunRecord r;
    r.run_id = run_id;
    r.stage_id = static_cast<int>(st.i64(0));
    if (!st.is_null(1)) r.weight = st.real(1);
    r.status = status_of(st.text(2), run_id);
    r.run_dir = st.text(3);
    r.attempts = static_cast<int>(st.i64(4));
    if (!st.is_null(5)) r.exit_code = static_cast<int>(st.i64(5));
    sql::Stmt ps(db.get(), "SELECT idx, value FROM run_params WHERE run_id = ? ORDER BY idx");
    ps.bind(1, run_id);
    r.params.assign(config.parameters.size(), 0.0);
    while (ps.step()) {
      const auto idx = static_cast<std::size_t>(ps.i64(0));
      if (idx >= r.params.size()) throw StoreCorrupt("run parameter index out of range");
      r.params[idx] = ps.real(1);
    }
    return r;
  }

  std::vector<RunRecord> read_runs(const std::string& where, const std::function<void(sql::Stmt&)>& binder) const {
    std::vector<RunRecord> out;
    sql::Stmt st(db.get(), "SELECT run_id, stage_id, weight, status, run_dir, attempts, exit_code FROM runs " +
                               where + " ORDER BY run_id");
    binder(st);
    std::map<std::int64_t, std::size_t> pos;
    while (st.step()) {
      RunRecord r;
      r.run_id = st.i64(0);
      r.stage_id = static_cast<int>(st.i64(1));
      if (!st.is_null(2)) r.weight = st.real(2);
      r.status = status_of(st.text(3), r.run_id);
      r.run_dir = st.text(4);
      r.attempts = static_cast<int>(st.i64(5));
      if (!st.is_null(6)) r.exit_code = static_cast<int>(st.i64(6));
      r.params.assign(config.parameters.size(), 0.0);
      pos[r.run_id] = out.size();
      out.push_back(std::move(r));
    }
    if (out.empty()) return out;
    sql::Stmt ps(db.get(), "SELECT run_id, idx, value FROM run_params WHERE run_id BETWEEN ? AND ?");
    ps.bind(1, out.front().run_id).bind(2, out.back().run_id);
    while (ps.step()) {
      auto it = pos.find(ps.i64(0));
      if (it == pos.end()) continue;
      const auto idx = static_cast<std::size_t>(ps.i64(1));
      if (idx >= config.parameters.size()) throw StoreCorrupt("run parameter index out of range");
      out[it->second].params[idx] = ps.real(2);
    }
    return out;
  }

  void set_status(std::int64_t run_id, RunStatus from, RunStatus to, std::optional<int> exit_code) {
    if (!transition_allowed(from, to))
      throw TransitionError("run " + std::to_string(run_id) + ": transition " + to_string(from) + " -> " +
                            to_string(to) + " is not allowed");
    const bool retry = from == RunStatus::FAILED && to == RunStatus::ENCODED;
    sql::Stmt st(db.get(),
                 "UPDATE runs SET status = ?, attempts = attempts + ?, exit_code = ? "
                 "WHERE run_id = ? AND status = ?");
    st.bind(1, to_string(to)).bind(2, retry ? 1 : 0).bind(3, exit_code).bind(4, run_id).bind(5, to_string(from));
    st.run();
    if (sqlite3_changes(db.get()) != 1)
      throw TransitionError("run " + std::to_string(run_id) + " changed status concurrently");
  }
};

Store::Store(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;
Store::~Store() = default;

const fs::path& Store::workdir() const { return impl_->workdir; }
const CampaignConfig& Store::config() const { return impl_->config; }
std::string Store::created_at() const { return impl_->created; }

Store Store::create(const fs::path& workdir, const CampaignConfig& cfg) {
  if (cfg.parameters.empty()) throw ConfigError("campaign needs at least one parameter");
  std::error_code ec;
  fs::create_directories(workdir, ec);
  if (ec) throw IoError("cannot create workdir " + workdir.string() + ": " + ec.message());
  const fs::path file = workdir / kStoreFile;
  if (fs::exists(file)) throw ConfigError("a campaign store already exists at " + file.string());

  auto impl = std::make_unique<Impl>();
  impl->workdir = fs::absolute(workdir).lexically_normal();
  impl->db = sql::Db(file.string(), SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
  configure(impl->db);
  impl->config = cfg;
  impl->created = now_utc();

  auto& db = impl->db;
  sql::Tx tx(db);
  db.exec(kSchema);
  {
    sql::Stmt st(db.get(), "INSERT INTO meta(key, value) VALUES (?, ?)");
    const json doc = to_json(cfg);
    for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
             {"schema_version", std::to_string(kStoreSchemaVersion)},
             {"name", cfg.name},
             {"created", impl->created},
             {"config", doc.dump()}}) {
      st.bind(1, k).bind(2, v);
      st.run();
    }
  }
  {
    sql::Stmt st(db.get(), "INSERT INTO params(idx, name, kind, default_value, distribution) VALUES (?,?,?,?,?)");
    for (std::size_t i = 0; i < cfg.parameters.size(); ++i) {
      const auto& p = cfg.parameters[i];
      st.bind(1, static_cast<std::int64_t>(i))
          .bind(2, p.name)
          .bind(3, p.kind == ParamKind::real ? "real" : "integer")
          .bind(4, p.default_value)
          .bind(5, to_json(p.distribution).dump());
      st.run();
    }
  }
  {
    sql::Stmt st(db.get(),
                 "INSERT INTO app(id, template_path, template_text, target, delimiter, command, decoder) "
                 "VALUES (1,?,?,?,?,?,?)");
    st.bind(1, cfg.app.template_path.string())
        .bind(2, cfg.app.template_text)
        .bind(3, cfg.app.target)
        .bind(4, std::string(1, cfg.app.delimiter))
        .bind(5, json(cfg.app.command).dump())
        .bind(6, to_json(cfg.app.decoder).dump());
    st.run();
  }
  tx.commit();
  return Store(std::move(impl));
}

Store Store::open(const fs::path& workdir) {
  const fs::path file = workdir / kStoreFile;
  if (!fs::is_regular_file(file)) throw NotFound("no campaign store at " + file.string());
  auto impl = std::make_unique<Impl>();
  impl->workdir = fs::absolute(workdir).lexically_normal();
  impl->db = sql::Db(file.string(), SQLITE_OPEN_READWRITE);
  try {
    configure(impl->db);
    auto meta = [&](const char* key) {
      sql::Stmt st(impl->db.get(), "SELECT value FROM meta WHERE key = ?");
      st.bind(1, key);
      if (!st.step()) throw StoreCorrupt(std::string("store metadata lacks '") + key + "'");
      return st.text(0);
    };
    if (meta("schema_version") != std::to_string(kStoreSchemaVersion))
      throw StoreCorrupt("unsupported store schema version " + meta("schema_version"));
    impl->created = meta("created");
    try {
      impl->config = parse_config(json::parse(meta("config")), impl->workdir);
    } catch (const Error& e) {
      throw StoreCorrupt(std::string("stored campaign config is invalid: ") + e.what());
    } catch (const json::exception& e) {
      throw StoreCorrupt(std::string("stored campaign config is not JSON: ") + e.what());
    }
  } catch (const IoError& e) {
    // a file that is not a campaign database surfaces as a missing table
    throw StoreCorrupt(e.what());
  }
  Store s(std::move(impl));
  s.verify();
  return s;
}

void Store::verify() const {
  auto& db = impl_->db;
  auto scalar = [&](const std::string& q) {
    sql::Stmt st(db.get(), q);
    if (!st.step()) return std::int64_t{0};
    return st.i64(0);
  };
  try {
    {
      sql::Stmt st(db.get(), "PRAGMA quick_check");
      if (!st.step() || st.text(0) != "ok") throw StoreCorrupt("database integrity check failed");
    }
    const auto nparams = scalar("SELECT COUNT(*) FROM params");
    if (nparams != static_cast<std::int64_t>(impl_->config.parameters.size()))
      throw StoreCorrupt("parameter table does not match the stored config");
    const auto nruns = scalar("SELECT COUNT(*) FROM runs");
    if (nruns > 0 && (scalar("SELECT MIN(run_id) FROM runs") != 1 || scalar("SELECT MAX(run_id) FROM runs") != nruns))
      throw StoreCorrupt("run ids are not dense from 1");
    if (scalar("SELECT COUNT(*) FROM runs WHERE stage_id NOT IN (SELECT stage_id FROM stages)") != 0)
      throw StoreCorrupt("a run references a missing stage");
    if (scalar("SELECT COUNT(*) FROM runs WHERE status NOT IN "
               "('NEW','ENCODED','SUBMITTED','COMPLETED','FAILED','COLLATED')") != 0)
      throw StoreCorrupt("a run has an unknown status");
    if (scalar("SELECT COUNT(*) FROM run_params") != nruns * nparams ||
        scalar("SELECT COUNT(*) FROM run_params WHERE run_id NOT IN (SELECT run_id FROM runs) "
               "OR idx NOT IN (SELECT idx FROM params)") != 0)
      throw StoreCorrupt("run parameter table is incomplete");
    if (scalar("SELECT COUNT(*) FROM stages s WHERE sample_count != "
               "(SELECT COUNT(*) FROM runs r WHERE r.stage_id = s.stage_id)") != 0)
      throw StoreCorrupt("a stage's run count differs from its recorded sample count");
    if (scalar("SELECT COUNT(*) FROM qoi_values v JOIN runs r USING (run_id) WHERE r.status != 'COLLATED'") != 0)
      throw StoreCorrupt("QoI values exist for a run that is not COLLATED");
    const auto nqoi = scalar("SELECT COUNT(*) FROM qoi_index");
    if (scalar("SELECT COUNT(*) FROM runs r WHERE status = 'COLLATED' AND "
               "(SELECT COUNT(*) FROM qoi_values v WHERE v.run_id = r.run_id) != " +
               std::to_string(nqoi)) != 0)
      throw StoreCorrupt("a COLLATED run lacks QoI values");
    if (scalar("SELECT COUNT(*) FROM qoi_values v JOIN qoi_index i USING (qoi) "
               "WHERE length(v.data) != 8 * i.length") != 0)
      throw StoreCorrupt("a QoI vector's length differs from its index");
  } catch (const IoError& e) {
    throw StoreCorrupt(e.what());
  }
}

int Store::add_stage(const sampling::SamplerSpec& spec, std::size_t cap) {
  const auto& params = impl_->config.parameters;
  if (sampling::is_quadrature(spec))
    for (const auto& p : params)
      if (p.kind == ParamKind::integer && !p.distribution.is_constant())
        throw SamplerError("quadrature samplers need real parameters; '" + p.name + "' is integer");
  auto samples = sampling::draw(params, spec, cap);
  for (auto& s : samples)
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i].kind == ParamKind::integer) s.values[i] = std::round(s.values[i]);

  const json sampler = to_json(spec);
  std::string rng;
  std::optional<std::int64_t> seed;
  if (const auto* mc = std::get_if<sampling::McSpec>(&spec)) {
    rng = Philox4x32::kAlgorithm;
    seed = static_cast<std::int64_t>(mc->seed);
  }

  auto& db = impl_->db;
  sql::Tx tx(db);
  const std::int64_t first = [&] {
    sql::Stmt st(db.get(), "SELECT COALESCE(MAX(run_id), 0) + 1 FROM runs");
    st.step();
    return st.i64(0);
  }();
  const int stage_id = [&] {
    sql::Stmt st(db.get(), "SELECT COALESCE(MAX(stage_id), 0) + 1 FROM stages");
    st.step();
    return static_cast<int>(st.i64(0));
  }();
  {
    sql::Stmt st(db.get(),
                 "INSERT INTO stages(stage_id, sampler, rng, seed, sample_count, first_run) VALUES (?,?,?,?,?,?)");
    st.bind(1, stage_id).bind(2, sampler.dump());
    if (rng.empty()) st.bind_null(3);
    else st.bind(3, rng);
    st.bind(4, seed).bind(5, static_cast<std::int64_t>(samples.size())).bind(6, first);
    st.run();
  }
  sql::Stmt ins(db.get(), "INSERT INTO runs(run_id, stage_id, weight, status, run_dir) VALUES (?,?,?,'NEW',?)");
  sql::Stmt insp(db.get(), "INSERT INTO run_params(run_id, idx, value) VALUES (?,?,?)");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const std::int64_t id = first + static_cast<std::int64_t>(k);
    ins.bind(1, id).bind(2, stage_id).bind(3, samples[k].weight).bind(4, "runs/" + run_dir_name(id));
    ins.run();
    for (std::size_t i = 0; i < params.size(); ++i) {
      insp.bind(1, id).bind(2, static_cast<std::int64_t>(i)).bind(3, samples[k].values[i]);
      insp.run();
    }
  }
  tx.commit();
  return stage_id;
}

std::vector<StageInfo> Store::stages() const {
  std::vector<StageInfo> out;
  sql::Stmt st(impl_->db.get(),
               "SELECT stage_id, sampler, rng, seed, sample_count, first_run FROM stages ORDER BY stage_id");
  while (st.step()) {
    StageInfo s;
    s.stage_id = static_cast<int>(st.i64(0));
    try {
      s.sampler_json = json::parse(st.text(1));
      s.sampler = sampler_from_json(s.sampler_json);
    } catch (const std::exception& e) {
      throw StoreCorrupt("stage " + std::to_string(s.stage_id) + " has an invalid sampler: " + e.what());
    }
    s.rng = st.text(2);
    s.seed = st.is_null(3) ? 0 : static_cast<std::uint64_t>(st.i64(3));
    s.sample_count = static_cast<std::size_t>(st.i64(4));
    s.first_run = st.i64(5);
    out.push_back(std::move(s));
  }
  return out;
}

StageInfo Store::stage(int stage_id) const {
  for (auto& s : stages())
    if (s.stage_id == stage_id) return s;
  throw NotFound("no stage with id " + std::to_string(stage_id));
}

std::int64_t Store::run_count() const {
  sql::Stmt st(impl_->db.get(), "SELECT COUNT(*) FROM runs");
  st.step();
  return st.i64(0);
}

RunRecord Store::run(std::int64_t run_id) const { return impl_->read_run(run_id); }

std::vector<RunRecord> Store::runs(std::optional<int> stage_id) const {
  if (!stage_id) return impl_->read_runs("", [](sql::Stmt&) {});
  return impl_->read_runs("WHERE stage_id = ?", [&](sql::Stmt& st) { st.bind(1, *stage_id); });
}

std::vector<RunRecord> Store::runs_with_status(RunStatus s) const {
  return impl_->read_runs("WHERE status = ?", [&](sql::Stmt& st) { st.bind(1, to_string(s)); });
}

std::map<RunStatus, std::size_t> Store::status_counts(std::optional<int> stage_id) const {
  std::map<RunStatus, std::size_t> out;
  for (auto s : kAllStatuses) out[s] = 0;
  sql::Stmt st(impl_->db.get(), stage_id ? "SELECT status, COUNT(*) FROM runs WHERE stage_id = ? GROUP BY status"
                                          : "SELECT status, COUNT(*) FROM runs GROUP BY status");
  if (stage_id) st.bind(1, *stage_id);
  while (st.step()) out[status_of(st.text(0), 0)] = static_cast<std::size_t>(st.i64(1));
  return out;
}

void Store::transition(std::int64_t run_id, RunStatus to, std::optional<int> exit_code) {
  sql::Tx tx(impl_->db);
  const auto r = impl_->read_run(run_id);
  impl_->set_status(run_id, r.status, to, exit_code);
  tx.commit();
}

fs::path Store::encode(std::int64_t run_id) {
  const auto r = impl_->read_run(run_id);
  if (r.status != RunStatus::NEW && r.status != RunStatus::FAILED && r.status != RunStatus::ENCODED)
    throw TransitionError("run " + std::to_string(run_id) + " is " + to_string(r.status) + "; cannot encode");
  const auto& cfg = impl_->config;
  const std::string text = render(cfg.app.template_text, cfg.app.delimiter, [&](std::string_view name) {
    for (std::size_t i = 0; i < cfg.parameters.size(); ++i)
      if (cfg.parameters[i].name == name) return format_double(r.params[i]);
    throw EncodingError("run " + std::to_string(run_id) + ": placeholder '" + std::string(name) +
                        "' has no value");
  });
  const fs::path dir = run_path(r);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_file_atomic(dir / cfg.app.target, text);
  if (r.status != RunStatus::ENCODED) transition(run_id, RunStatus::ENCODED);
  return dir;
}

DecodedOutput Store::decode(std::int64_t run_id) {
  const auto r = impl_->read_run(run_id);
  if (r.status != RunStatus::COMPLETED)
    throw TransitionError("run " + std::to_string(run_id) + " is " + to_string(r.status) + "; cannot decode");
  const auto& spec = impl_->config.app.decoder;
  DecodedOutput out;
  try {
    out = decode_output(run_path(r) / spec.output, spec);
  } catch (const DecodeError& e) {
    throw DecodeError("run " + std::to_string(run_id) + ": " + e.what());
  }

  auto& db = impl_->db;
  sql::Tx tx(db);
  sql::Stmt get_index(db.get(), "SELECT length, data FROM qoi_index WHERE qoi = ?");
  sql::Stmt put_index(db.get(), "INSERT INTO qoi_index(qoi, length, data) VALUES (?,?,?)");
  sql::Stmt put_value(db.get(), "INSERT OR REPLACE INTO qoi_values(run_id, qoi, data) VALUES (?,?,?)");
  for (const auto& [qoi, values] : out.qois) {
    get_index.bind(1, qoi);
    if (get_index.step()) {
      const auto len = static_cast<std::size_t>(get_index.i64(0));
      const auto idx = get_index.doubles(1);
      get_index.reset();
      if (len != values.size())
        throw DecodeError("run " + std::to_string(run_id) + ": QoI '" + qoi + "' has length " +
                          std::to_string(values.size()) + " but the collated frame holds length " +
                          std::to_string(len));
      if (idx != out.index)
        throw DecodeError("run " + std::to_string(run_id) + ": QoI '" + qoi +
                          "' has an index column that differs from the collated frame");
    } else {
      get_index.reset();
      put_index.bind(1, qoi).bind(2, static_cast<std::int64_t>(out.index.size()));
      put_index.bind_blob(3, out.index.data(), out.index.size() * sizeof(double));
      put_index.run();
    }
    put_value.bind(1, run_id).bind(2, qoi).bind_blob(3, values.data(), values.size() * sizeof(double));
    put_value.run();
  }
  impl_->set_status(run_id, RunStatus::COMPLETED, RunStatus::COLLATED, r.exit_code);
  tx.commit();
  return out;
}

std::size_t Store::reconcile_submitted() {
  std::size_t n = 0;
  for (const auto& r : runs_with_status(RunStatus::SUBMITTED)) {
    const auto code = reconcile_run(run_path(r), r.attempts);
    if (code && *code == 0) transition(r.run_id, RunStatus::COMPLETED, 0);
    else transition(r.run_id, RunStatus::FAILED, code);
    ++n;
  }
  return n;
}

ResumeSummary Store::resume() {
  auto& db = impl_->db;
  sql::Tx tx(db);
  ResumeSummary s;
  const auto c = status_counts();
  s.collated = c.at(RunStatus::COLLATED);
  s.completed = c.at(RunStatus::COMPLETED);
  s.retry = c.at(RunStatus::FAILED);
  s.pending = c.at(RunStatus::NEW) + c.at(RunStatus::ENCODED);
  s.submitted = c.at(RunStatus::SUBMITTED);
  db.exec("UPDATE runs SET status = 'ENCODED', attempts = attempts + 1, exit_code = NULL WHERE status = 'FAILED'");
  tx.commit();
  return s;
}

std::vector<std::string> Store::qoi_names() const {
  std::vector<std::string> out;
  sql::Stmt st(impl_->db.get(), "SELECT qoi FROM qoi_index ORDER BY qoi");
  while (st.step()) out.push_back(st.text(0));
  return out;
}

std::vector<double> Store::qoi_index(const std::string& qoi) const {
  sql::Stmt st(impl_->db.get(), "SELECT data FROM qoi_index WHERE qoi = ?");
  st.bind(1, qoi);
  if (!st.step()) throw NotFound("no collated QoI named '" + qoi + "'");
  return st.doubles(0);
}

std::map<std::int64_t, std::vector<double>> Store::qoi_values(const std::string& qoi) const {
  std::map<std::int64_t, std::vector<double>> out;
  sql::Stmt st(impl_->db.get(), "SELECT run_id, data FROM qoi_values WHERE qoi = ? ORDER BY run_id");
  st.bind(1, qoi);
  while (st.step()) out.emplace(st.i64(0), st.doubles(1));
  return out;
}

std::optional<std::vector<double>> Store::qoi_value(std::int64_t run_id, const std::string& qoi) const {
  sql::Stmt st(impl_->db.get(), "SELECT data FROM qoi_values WHERE run_id = ? AND qoi = ?");
  st.bind(1, run_id).bind(2, qoi);
  if (!st.step()) return std::nullopt;
  return st.doubles(0);
}

void Store::record_scores(const std::string& scorer, const std::map<std::int64_t, double>& scores) {
  sql::Tx tx(impl_->db);
  sql::Stmt st(impl_->db.get(), "INSERT OR REPLACE INTO run_scores(run_id, scorer, score) VALUES (?,?,?)");
  for (const auto& [id, v] : scores) {
    st.bind(1, id).bind(2, scorer).bind(3, v);
    st.run();
  }
  tx.commit();
}

std::map<std::int64_t, double> Store::scores(const std::string& scorer) const {
  std::map<std::int64_t, double> out;
  sql::Stmt st(impl_->db.get(), "SELECT run_id, score FROM run_scores WHERE scorer = ? ORDER BY run_id");
  st.bind(1, scorer);
  while (st.step()) out[st.i64(0)] = st.real(1);
  return out;
}

std::string Store::dump_stage(int stage_id) const {
  std::ostringstream os;
  {
    sql::Stmt st(impl_->db.get(),
                 "SELECT stage_id, sampler, rng, seed, sample_count, first_run FROM stages WHERE stage_id = ?");
    st.bind(1, stage_id);
    if (!st.step()) throw NotFound("no stage with id " + std::to_string(stage_id));
    os << "stage " << st.i64(0) << ' ' << st.text(1) << ' ' << st.text(2) << ' ' << st.i64(3) << ' ' << st.i64(4)
       << ' ' << st.i64(5) << '\n';
  }
  const auto qois = qoi_names();
  for (const auto& r : runs(stage_id)) {
    os << "run " << r.run_id << ' ' << r.stage_id << ' ' << (r.weight ? hex(*r.weight) : "null") << ' '
       << to_string(r.status) << ' ' << r.run_dir << ' ' << r.attempts << ' '
       << (r.exit_code ? std::to_string(*r.exit_code) : "null");
    for (double v : r.params) os << ' ' << hex(v);
    os << '\n';
    for (const auto& q : qois) {
      if (auto v = qoi_value(r.run_id, q)) {
        os << "  " << q;
        for (double x : *v) os << ' ' << hex(x);
        os << '\n';
      }
    }
  }
  return os.str();
}

}  // namespace vvuq::campaign
