#include "apmec/descriptor.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace apmec {

std::string_view to_string(AlarmAction action) { return action == AlarmAction::heal ? "heal" : "scale_out"; }

std::string_view to_string(DescriptorErrorKind kind)
{
    switch (kind) {
    case DescriptorErrorKind::syntax_error: return "syntax_error";
    case DescriptorErrorKind::unknown_version: return "unknown_version";
    case DescriptorErrorKind::missing_section: return "missing_section";
    case DescriptorErrorKind::missing_field: return "missing_field";
    case DescriptorErrorKind::unknown_key: return "unknown_key";
    case DescriptorErrorKind::invalid_value: return "invalid_value";
    case DescriptorErrorKind::duplicate_type: return "duplicate_type";
    case DescriptorErrorKind::bad_chain: return "bad_chain";
    }
    return "unknown";
}

namespace {

std::string with_line(std::string what, int line)
{
    if (line > 0) {
        return "line " + std::to_string(line) + ": " + what;
    }
    return what;
}

} // namespace

DescriptorError::DescriptorError(DescriptorErrorKind kind, std::string what, int line)
    : std::runtime_error(with_line(std::string(to_string(kind)) + ": " + what, line)), kind_(kind), line_(line)
{
}

namespace {

using Kind = DescriptorErrorKind;

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

[[noreturn]] void fail(Kind kind, const std::string& what, const YAML::Node& at)
{
    throw DescriptorError(kind, what, line_of(at));
}

void require_map(const YAML::Node& node, const std::string& where)
{
    if (!node.IsMap()) {
        fail(Kind::invalid_value, where + " must be a mapping", node);
    }
}

void reject_unknown_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed,
                         const std::string& where)
{
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        bool known = false;
        for (auto a : allowed) {
            known = known || key == a;
        }
        if (!known) {
            fail(Kind::unknown_key, "unknown key '" + key + "' in " + where, kv.first);
        }
    }
}

YAML::Node field(const YAML::Node& map, const char* key, const std::string& where)
{
    auto node = map[key];
    if (!node) {
        fail(Kind::missing_field, where + " is missing '" + key + "'", map);
    }
    return node;
}

std::string scalar(const YAML::Node& node, const std::string& what)
{
    if (!node.IsScalar()) {
        fail(Kind::invalid_value, what + " must be a scalar", node);
    }
    return node.Scalar();
}

std::uint32_t positive_int(const YAML::Node& node, const std::string& what)
{
    const auto text = scalar(node, what);
    long long v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || v < 1 || v > 0xFFFFFFFFLL) {
        fail(Kind::invalid_value, what + " must be a positive integer, got '" + text + "'", node);
    }
    return static_cast<std::uint32_t>(v);
}

double finite_double(const YAML::Node& node, const std::string& what)
{
    const auto text = scalar(node, what);
    double v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v)) {
        fail(Kind::invalid_value, what + " must be a finite number, got '" + text + "'", node);
    }
    return v;
}

AlarmConfig parse_alarm(const YAML::Node& node)
{
    require_map(node, "mead.alarm");
    reject_unknown_keys(node, {"metric", "threshold", "action"}, "mead.alarm");
    AlarmConfig alarm;
    alarm.metric = scalar(field(node, "metric", "mead.alarm"), "alarm metric");
    alarm.threshold = finite_double(field(node, "threshold", "mead.alarm"), "alarm threshold");
    auto action_node = field(node, "action", "mead.alarm");
    const auto action = scalar(action_node, "alarm action");
    if (action == "scale_out") {
        alarm.action = AlarmAction::scale_out;
    } else if (action == "heal") {
        alarm.action = AlarmAction::heal;
    } else {
        fail(Kind::invalid_value, "alarm action must be scale_out or heal, got '" + action + "'", action_node);
    }
    return alarm;
}

MeadDesc parse_mead(const YAML::Node& node)
{
    require_map(node, "mead");
    reject_unknown_keys(node, {"name", "vcpus", "memory_mb", "alarm"}, "mead");
    MeadDesc mead;
    mead.mea.name = scalar(field(node, "name", "mead"), "mead name");
    mead.mea.vcpus = positive_int(field(node, "vcpus", "mead"), "mead vcpus");
    mead.mea.memory_mb = positive_int(field(node, "memory_mb", "mead"), "mead memory_mb");
    if (auto alarm = node["alarm"]) {
        mead.alarm = parse_alarm(alarm);
    }
    return mead;
}

void parse_nsd(const YAML::Node& node, MESD& out)
{
    require_map(node, "nsd");
    reject_unknown_keys(node, {"vnfs", "chain"}, "nsd");
    auto vnfs = field(node, "vnfs", "nsd");
    if (!vnfs.IsSequence() || vnfs.size() == 0) {
        fail(Kind::invalid_value, "nsd.vnfs must be a non-empty list", vnfs);
    }
    std::set<std::string> seen;
    for (const auto& entry : vnfs) {
        require_map(entry, "nsd.vnfs entry");
        reject_unknown_keys(entry, {"type", "instances"}, "nsd.vnfs entry");
        VnfEntry vnf;
        vnf.type = scalar(field(entry, "type", "nsd.vnfs entry"), "vnf type");
        vnf.instances = positive_int(field(entry, "instances", "nsd.vnfs entry"), "vnf instances");
        if (!seen.insert(vnf.type).second) {
            fail(Kind::duplicate_type, "NF type '" + vnf.type + "' listed twice", entry);
        }
        out.vnfs.push_back(std::move(vnf));
    }
    if (auto chain = node["chain"]) {
        if (!chain.IsSequence()) {
            fail(Kind::invalid_value, "nsd.chain must be a list", chain);
        }
        std::vector<std::string> hops;
        std::set<std::string> used;
        for (const auto& hop : chain) {
            auto name = scalar(hop, "chain entry");
            if (seen.count(name) == 0) {
                fail(Kind::bad_chain, "chain names '" + name + "' which is not in nsd.vnfs", hop);
            }
            if (!used.insert(name).second) {
                fail(Kind::bad_chain, "chain visits '" + name + "' twice", hop);
            }
            hops.push_back(std::move(name));
        }
        out.chain = std::move(hops);
    }
}

} // namespace

MESD parse_mesd(std::string_view text)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw DescriptorError(Kind::syntax_error, e.msg, e.mark.line + 1);
    }
    if (!root || root.IsNull()) {
        throw DescriptorError(Kind::missing_field, "empty document", 1);
    }

    try {
        require_map(root, "document");
        reject_unknown_keys(root, {"mesd_version", "name", "mead", "nsd"}, "document");

        MESD mesd;
        auto version = root["mesd_version"];
        if (!version) {
            fail(Kind::missing_field, "document is missing 'mesd_version'", root);
        }
        mesd.version = scalar(version, "mesd_version");
        if (mesd.version != kMesdVersion) {
            fail(Kind::unknown_version, "unsupported mesd_version '" + mesd.version + "'", version);
        }
        mesd.name = scalar(field(root, "name", "document"), "name");

        auto mead = root["mead"];
        if (!mead) {
            throw DescriptorError(Kind::missing_section, "missing section 'mead'", line_of(root));
        }
        auto nsd = root["nsd"];
        if (!nsd) {
            throw DescriptorError(Kind::missing_section, "missing section 'nsd'", line_of(root));
        }
        mesd.mead = parse_mead(mead);
        parse_nsd(nsd, mesd);
        return mesd;
    } catch (const YAML::Exception& e) {
        throw DescriptorError(Kind::invalid_value, e.msg, e.mark.line + 1);
    }
}

MESD load_mesd(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_mesd(buf.str());
}

void validate(const MESD& mesd)
{
    if (mesd.version != kMesdVersion) {
        throw DescriptorError(Kind::unknown_version, "unsupported mesd_version '" + mesd.version + "'");
    }
    if (mesd.mead.mea.vcpus < 1 || mesd.mead.mea.memory_mb < 1) {
        throw DescriptorError(Kind::invalid_value, "mead resources must be positive");
    }
    if (mesd.mead.alarm && !std::isfinite(mesd.mead.alarm->threshold)) {
        throw DescriptorError(Kind::invalid_value, "alarm threshold must be finite");
    }
    if (mesd.vnfs.empty()) {
        throw DescriptorError(Kind::missing_section, "missing section 'nsd'");
    }
    std::set<std::string> seen;
    for (const auto& vnf : mesd.vnfs) {
        if (vnf.instances < 1) {
            throw DescriptorError(Kind::invalid_value, "NF type '" + vnf.type + "' needs at least one instance");
        }
        if (!seen.insert(vnf.type).second) {
            throw DescriptorError(Kind::duplicate_type, "NF type '" + vnf.type + "' listed twice");
        }
    }
    if (mesd.chain) {
        std::set<std::string> used;
        for (const auto& hop : *mesd.chain) {
            if (seen.count(hop) == 0 || !used.insert(hop).second) {
                throw DescriptorError(Kind::bad_chain, "chain entry '" + hop + "' is not a distinct nsd type");
            }
        }
    }
}

namespace {

std::string shortest(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

} // namespace

std::string serialize_mesd(const MESD& mesd)
{
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "mesd_version" << YAML::Value << mesd.version;
    out << YAML::Key << "name" << YAML::Value << mesd.name;

    out << YAML::Key << "mead" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << mesd.mead.mea.name;
    out << YAML::Key << "vcpus" << YAML::Value << mesd.mead.mea.vcpus;
    out << YAML::Key << "memory_mb" << YAML::Value << mesd.mead.mea.memory_mb;
    if (mesd.mead.alarm) {
        const auto& alarm = *mesd.mead.alarm;
        out << YAML::Key << "alarm" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "metric" << YAML::Value << alarm.metric;
        out << YAML::Key << "threshold" << YAML::Value << shortest(alarm.threshold);
        out << YAML::Key << "action" << YAML::Value << std::string(to_string(alarm.action));
        out << YAML::EndMap;
    }
    out << YAML::EndMap;

    out << YAML::Key << "nsd" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "vnfs" << YAML::Value << YAML::BeginSeq;
    for (const auto& vnf : mesd.vnfs) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "type" << YAML::Value << vnf.type;
        out << YAML::Key << "instances" << YAML::Value << vnf.instances;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    if (mesd.chain) {
        out << YAML::Key << "chain" << YAML::Value << YAML::Flow << *mesd.chain;
    }
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

MESRequest to_request(const MESD& mesd, NfCatalog& catalog, RequestId id)
{
    CountMap members;
    for (const auto& vnf : mesd.vnfs) {
        members[catalog.resolve(vnf.type)] = vnf.instances;
    }
    return MESRequest{id, mesd.mead.mea, NSSpec(std::move(members))};
}

} // namespace apmec
