#include "astrosyn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace astrosyn {

using nlohmann::json;

const std::vector<PresetInfo>& preset_catalog()
{
    static const std::vector<PresetInfo> catalog = {
        {"case1", "extended astrocyte model, no glutamate input"},
        {"case2", "extended astrocyte model, J_glu = A_glu persistent, strong gliotransmission (eta = 1)"},
        {"case3", "extended astrocyte model, J_glu = A_glu persistent, weak gliotransmission (eta = 0.25)"},
        {"pulse", "extended astrocyte model, 0.2 s J_glu pulse, strong gliotransmission"},
        {"tripartite-short", "full tripartite synapse, 0.2 s presynaptic stimulus of 100 uA"},
        {"tripartite-persistent", "full tripartite synapse, persistent presynaptic stimulus of 100 uA"},
        {"wm-strong", "working-memory network, eta = 1, no recall cue"},
        {"wm-weak", "working-memory network, eta = 0.25, noisy recall cue"},
        {"wm-none", "working-memory network, eta = 0, noisy recall cue"},
        {"stability-report", "equilibria, eigenvalues, ultimate bound and property verdicts"},
    };
    return catalog;
}

bool is_preset(const std::string& name)
{
    const auto& c = preset_catalog();
    return std::any_of(c.begin(), c.end(), [&](const PresetInfo& p) { return p.name == name; });
}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Strict reader over one JSON object: every key must be consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    void number(const char* key, double& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number()) throw ConfigError(join(path_, key), "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out)) throw ConfigError(join(path_, key), "must be finite");
        }
    }

    void count(const char* key, std::size_t& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number_integer() || v->get<long long>() < 0) {
                throw ConfigError(join(path_, key), "expected a nonnegative integer");
            }
            out = v->get<std::size_t>();
        }
    }

    void seed(const char* key, std::uint64_t& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0)) {
                throw ConfigError(join(path_, key), "expected a nonnegative integer");
            }
            out = v->get<std::uint64_t>();
        }
    }

    void flag(const char* key, bool& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) throw ConfigError(join(path_, key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void text(const char* key, std::string& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_string()) throw ConfigError(join(path_, key), "expected a string");
            out = v->get<std::string>();
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    std::optional<Section> child(const char* key)
    {
        if (const json* v = take(key)) return Section(*v, join(path_, key));
        return std::nullopt;
    }

    std::string path(const char* key) const { return join(path_, key); }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
        }
    }

private:
    const json* take(const char* key)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read(Section s, NeuronParams& p)
{
    s.number("a", p.a);
    s.number("b", p.b);
    s.number("c", p.c);
    s.number("d", p.d);
    s.number("alpha_glu", p.alpha_glu);
    s.number("k_glu", p.k_glu);
    s.number("spike_threshold", p.spike_threshold);
    s.number("eta_syn", p.eta_syn);
    s.number("e_syn_excitatory", p.e_syn_excitatory);
    s.number("e_syn_inhibitory", p.e_syn_inhibitory);
    s.number("k_syn", p.k_syn);
    s.finish();
}

void read(Section s, AstrocyteParams& p)
{
    s.number("tau_ip3", p.tau_ip3);
    s.number("ip3_star", p.ip3_star);
    s.number("v1", p.v1);
    s.number("v2", p.v2);
    s.number("v3", p.v3);
    s.number("v4", p.v4);
    s.number("v6", p.v6);
    s.number("k1", p.k1);
    s.number("k2", p.k2);
    s.number("k3", p.k3);
    s.number("k4", p.k4);
    s.number("c0", p.c0);
    s.number("c1", p.c1);
    s.number("d1", p.d1);
    s.number("d2", p.d2);
    s.number("d3", p.d3);
    s.number("d5", p.d5);
    s.number("a2", p.a2);
    s.number("alpha", p.alpha);
    s.number("a_glu", p.a_glu);
    s.number("g_thr", p.g_thr);
    s.number("d_ca", p.d_ca);
    s.number("d_ip3", p.d_ip3);
    s.finish();
}

void read(Section s, FiringRateParams& p, AstroCurrentModel& current)
{
    s.number("eta", p.eta);
    s.number("i_thr", p.i_thr);
    s.number("p1", p.p1);
    s.number("p2", p.p2);
    s.number("tanh_gate_scale", p.tanh_gate_scale);
    std::string model = current == AstroCurrentModel::smooth ? "smooth" : "exact";
    s.text("current", model);
    if (model == "smooth") {
        current = AstroCurrentModel::smooth;
    } else if (model == "exact") {
        current = AstroCurrentModel::exact;
    } else {
        throw ConfigError(s.path("current"), "expected \"smooth\" or \"exact\"");
    }
    s.finish();
}

void read(Section s, JgluMode& m)
{
    std::string mode = m.smooth ? "smooth" : "sharp";
    s.text("mode", mode);
    if (mode != "sharp" && mode != "smooth") throw ConfigError(s.path("mode"), "expected \"sharp\" or \"smooth\"");
    m.smooth = mode == "smooth";
    s.number("k_s", m.k_s);
    if (!(m.k_s > 0.0)) throw ConfigError(s.path("k_s"), "must be positive");
    s.finish();
}

void read(Section s, NetworkParams& p)
{
    s.count("n_neurons", p.n_neurons);
    s.count("n_astrocytes", p.n_astrocytes);
    s.count("synapses_per_neuron", p.synapses_per_neuron);
    s.number("lambda", p.lambda);
    s.count("gap_junction_min", p.gap_junction_min);
    s.count("gap_junction_max", p.gap_junction_max);
    s.number("ei_ratio", p.ei_ratio);
    std::string metric = p.metric == GridMetric::euclidean ? "euclidean" : "chebyshev";
    s.text("metric", metric);
    if (metric == "euclidean") {
        p.metric = GridMetric::euclidean;
    } else if (metric == "chebyshev") {
        p.metric = GridMetric::chebyshev;
    } else {
        throw ConfigError(s.path("metric"), "expected \"euclidean\" or \"chebyshev\"");
    }
    s.finish();
}

void read(Section s, ProtocolSpec& p, TargetPatch& patch)
{
    s.number("t_stim", p.t_stim);
    s.number("t_delay", p.t_delay);
    s.number("t_recall", p.t_recall);
    s.number("stim_amplitude", p.stim_amplitude);
    s.flag("cue_enabled", p.cue_enabled);
    s.number("cue_amplitude", p.cue_amplitude);
    s.number("cue_noise_sd", p.cue_noise_sd);
    s.number("eta", p.eta);
    s.count("trace_stride", p.trace_stride);
    if (auto t = s.child("target_patch")) {
        std::size_t col = patch.col.value_or(0);
        std::size_t row = patch.row.value_or(0);
        if (t->has("col")) {
            t->count("col", col);
            patch.col = col;
        }
        if (t->has("row")) {
            t->count("row", row);
            patch.row = row;
        }
        t->count("size", patch.size);
        t->finish();
    }
    s.finish();
}

void apply_preset_defaults(ExperimentConfig& cfg)
{
    const std::string& s = cfg.scenario;
    if (s == "case1" || s == "case2" || s == "case3" || s == "pulse") {
        cfg.duration = s == "pulse" ? 10.0 : 60.0;
        cfg.firing_rate.eta = s == "case3" ? kWeakEta : kStrongEta;
    } else if (s == "tripartite-short" || s == "tripartite-persistent") {
        cfg.duration = 6.0;
        cfg.tripartite.persistent = s == "tripartite-persistent";
    } else if (s == "wm-strong" || s == "wm-weak" || s == "wm-none") {
        cfg.protocol.eta = s == "wm-strong" ? 1.0 : (s == "wm-weak" ? 0.25 : 0.0);
        cfg.protocol.cue_enabled = s != "wm-strong";
    }
}

bool is_network(const std::string& s) { return s.rfind("wm-", 0) == 0; }

} // namespace

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("", "override '" + assignment + "' is not of the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError(key, "empty key segment");
        if (!node->is_object()) throw ConfigError(key, "cannot descend into a non-object value");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

json load_config_document(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    json doc = json::parse(buffer.str(), nullptr, false, true);
    if (doc.is_discarded()) throw ConfigError("", "config file '" + path + "' is not valid JSON");
    if (!doc.is_object()) throw ConfigError("", "config file '" + path + "' must hold a JSON object");
    return doc;
}

ExperimentConfig make_config(json doc, const CliOverrides& overrides)
{
    if (doc.is_null()) doc = json::object();
    if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
    for (const auto& s : overrides.sets) apply_override(doc, s);
    if (overrides.scenario) doc["scenario"] = *overrides.scenario;
    if (overrides.seed) doc["seed"] = *overrides.seed;
    if (overrides.output_dir) doc["output_dir"] = *overrides.output_dir;

    ExperimentConfig cfg;
    Section root(doc, "");
    root.text("scenario", cfg.scenario);
    if (cfg.scenario.empty()) throw ConfigError("scenario", "missing scenario name");
    if (!is_preset(cfg.scenario)) throw ConfigError("scenario", "unknown scenario '" + cfg.scenario + "'");
    apply_preset_defaults(cfg);

    root.number("dt", cfg.dt);
    if (root.has("duration") && (is_network(cfg.scenario) || cfg.scenario == "stability-report")) {
        throw ConfigError("duration", "not used by scenario '" + cfg.scenario
                                          + "' (network runs take their length from protocol.t_*)");
    }
    root.number("duration", cfg.duration);
    root.seed("seed", cfg.seed);
    root.text("output_dir", cfg.output_dir);

    if (auto s = root.child("export")) {
        s->count("stride", cfg.exports.stride);
        s->flag("plotdata", cfg.exports.plotdata);
        s->finish();
    }
    if (auto s = root.child("neuron")) read(*s, cfg.neuron);
    if (auto s = root.child("astrocyte")) read(*s, cfg.astrocyte);
    if (auto s = root.child("firing_rate")) read(*s, cfg.firing_rate, cfg.current);
    if (auto s = root.child("jglu")) read(*s, cfg.jglu);
    if (auto s = root.child("tripartite")) {
        s->number("eta", cfg.tripartite.eta);
        s->number("stim_amplitude", cfg.tripartite.stim_amplitude);
        s->number("stim_duration", cfg.tripartite.stim_duration);
        s->flag("persistent", cfg.tripartite.persistent);
        s->finish();
    }
    if (auto s = root.child("network")) read(*s, cfg.network);
    if (auto s = root.child("protocol")) read(*s, cfg.protocol, cfg.target_patch);
    if (auto s = root.child("stability")) {
        s->count("n_trials", cfg.stability_trials);
        s->finish();
    }
    root.finish();

    // Range checks, reported with the owning section.
    if (!(cfg.dt > 0.0)) throw ConfigError("dt", "must be positive");
    if (!is_network(cfg.scenario) && cfg.scenario != "stability-report" && !(cfg.duration >= cfg.dt)) {
        throw ConfigError("duration", "must be at least one time step");
    }
    if (cfg.exports.stride == 0) throw ConfigError("export.stride", "must be >= 1");
    if (cfg.stability_trials == 0) throw ConfigError("stability.n_trials", "must be >= 1");
    if (!(cfg.tripartite.eta >= 0.0 && cfg.tripartite.eta <= 1.0)) {
        throw ConfigError("tripartite.eta", "must lie in [0, 1]");
    }
    if (!(cfg.tripartite.stim_duration > 0.0)) throw ConfigError("tripartite.stim_duration", "must be positive");
    try {
        validate(cfg.neuron);
        validate(cfg.astrocyte);
        validate(cfg.firing_rate);
        validate(cfg.network);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("", e.what());
    }
    if (!(cfg.protocol.t_stim > 0.0 && cfg.protocol.t_delay > 0.0 && cfg.protocol.t_recall > 0.0)) {
        throw ConfigError("protocol", "t_stim, t_delay and t_recall must be positive");
    }
    if (!(cfg.protocol.eta >= 0.0 && cfg.protocol.eta <= 1.0)) throw ConfigError("protocol.eta", "must lie in [0, 1]");
    if (!(cfg.protocol.cue_noise_sd >= 0.0)) throw ConfigError("protocol.cue_noise_sd", "must be nonnegative");
    if (cfg.protocol.trace_stride == 0) throw ConfigError("protocol.trace_stride", "must be >= 1");
    if (cfg.target_patch.size == 0) throw ConfigError("protocol.target_patch.size", "must be >= 1");

    cfg.document = std::move(doc);
    return cfg;
}

std::vector<std::string> config_warnings(const ExperimentConfig& cfg) { return analysis_warnings(cfg.astrocyte); }

} // namespace astrosyn
