#include "ccedit/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ccedit/io.hpp"
#include "ccedit/training.hpp"

namespace ccedit {

namespace {

const std::vector<std::string> kCategories = {"Human", "Animal", "Object", "Landscape"};
const std::vector<std::string> kEditTypes = {"StyleChange", "ObjectChange", "BackgroundChange",
                                             "CompoundChange"};

bool one_of(const std::string& v, const std::vector<std::string>& set) {
    return std::find(set.begin(), set.end(), v) != set.end();
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "|" : "") + v[i];
    return s;
}

struct Checker {
    std::string record_id;
    std::vector<ValidationIssue>& issues;

    void fail(const std::string& field, const std::string& msg) {
        issues.push_back({record_id, field, msg});
    }

    std::string str(const nlohmann::json& j, const std::string& field, std::string label = "") {
        if (label.empty()) label = field;
        if (!j.contains(field) || !j[field].is_string()) {
            fail(label, "missing or non-string");
            return "";
        }
        std::string v = j[field].get<std::string>();
        if (v.empty()) fail(label, "empty");
        return v;
    }

    int rating(const nlohmann::json& j, const std::string& field, std::string label = "") {
        if (label.empty()) label = field;
        if (!j.contains(field) || !j[field].is_number_integer()) {
            fail(label, "missing or non-integer");
            return 0;
        }
        int v = j[field].get<int>();
        if (v < 1 || v > 3) fail(label, "value " + std::to_string(v) + " outside 1..3");
        return v;
    }
};

double cosine(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("cosine: embedding shape mismatch");
    if (a.bitwise_equal(b)) return 1.0;  // coinciding unit-norm vectors, exactly
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        dot += a.data[i] * b.data[i];
        na += a.data[i] * a.data[i];
        nb += b.data[i] * b.data[i];
    }
    if (na == 0.0 || nb == 0.0) throw std::runtime_error("cosine: zero-norm embedding");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

Tensor unit_norm(Tensor v) {
    double n = 0;
    for (double x : v.data) n += x * x;
    n = std::sqrt(n);
    if (n == 0.0) throw std::runtime_error("embedder: zero-norm vector");
    for (double& x : v.data) x /= n;
    return v;
}

}  // namespace

ValidationReport validate_records(const nlohmann::json& file) {
    ValidationReport rep;
    if (!file.is_object() || !file.contains("records") || !file["records"].is_array()) {
        rep.issues.push_back({"<file>", "records", "top-level 'records' array missing"});
        return rep;
    }
    int idx = 0;
    for (const auto& j : file["records"]) {
        BalanceCCRecord rec;
        std::string fallback_id = "record " + std::to_string(idx++);
        if (!j.is_object()) {
            rep.issues.push_back({fallback_id, "<record>", "not an object"});
            continue;
        }
        Checker c{j.contains("id") && j["id"].is_string() && !j["id"].get<std::string>().empty()
                      ? j["id"].get<std::string>()
                      : fallback_id,
                  rep.issues};
        rec.id = c.str(j, "id");
        rec.path = c.str(j, "path");
        rec.description = c.str(j, "description");
        rec.category = c.str(j, "category");
        if (!rec.category.empty() && !one_of(rec.category, kCategories))
            c.fail("category", "'" + rec.category + "' not in " + join(kCategories));
        rec.scene_complexity = c.rating(j, "scene_complexity");
        rec.camera_motion = c.rating(j, "camera_motion");
        rec.object_motion = c.rating(j, "object_motion");

        if (!j.contains("edits") || !j["edits"].is_array()) {
            c.fail("edits", "missing or non-array");
        } else {
            std::map<std::string, int> seen;
            int ei = 0;
            for (const auto& je : j["edits"]) {
                std::string fld = "edits[" + std::to_string(ei++) + "]";
                if (!je.is_object()) {
                    c.fail(fld, "not an object");
                    continue;
                }
                EditSpec es;
                es.edit_type = c.str(je, "edit_type", fld + ".edit_type");
                if (!es.edit_type.empty()) {
                    if (!one_of(es.edit_type, kEditTypes))
                        c.fail(fld + ".edit_type", "'" + es.edit_type + "' not in " + join(kEditTypes));
                    else
                        ++seen[es.edit_type];
                }
                es.target_prompt = c.str(je, "target_prompt", fld + ".target_prompt");
                es.fantasy_level = c.rating(je, "fantasy_level", fld + ".fantasy_level");
                rec.edits.push_back(std::move(es));
            }
            if (rec.edits.size() != 4)
                c.fail("edits", "expected exactly 4 edits, got " + std::to_string(rec.edits.size()));
            for (const auto& t : kEditTypes)
                if (seen[t] != 1)
                    c.fail("edits", t + " present " + std::to_string(seen[t]) + " times, expected 1");
        }
        rep.records.push_back(std::move(rec));
    }
    return rep;
}

ValidationReport load_and_validate(const std::string& path) {
    return validate_records(load_json(path));
}

nlohmann::json records_to_json(const std::vector<BalanceCCRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json edits = nlohmann::json::array();
        for (const auto& e : r.edits)
            edits.push_back({{"edit_type", e.edit_type},
                             {"target_prompt", e.target_prompt},
                             {"fantasy_level", e.fantasy_level}});
        arr.push_back({{"id", r.id},
                       {"path", r.path},
                       {"category", r.category},
                       {"description", r.description},
                       {"scene_complexity", r.scene_complexity},
                       {"camera_motion", r.camera_motion},
                       {"object_motion", r.object_motion},
                       {"edits", edits}});
    }
    return nlohmann::json{{"records", arr}};
}

CorpusStats corpus_stats(const std::vector<BalanceCCRecord>& records) {
    if (records.empty()) throw std::invalid_argument("corpus_stats: empty record list");
    CorpusStats st;
    for (const auto& r : records) {
        ++st.counts["category"][r.category];
        ++st.counts["scene_complexity"][std::to_string(r.scene_complexity)];
        ++st.counts["camera_motion"][std::to_string(r.camera_motion)];
        ++st.counts["object_motion"][std::to_string(r.object_motion)];
        for (const auto& e : r.edits) ++st.counts["fantasy_level"][std::to_string(e.fantasy_level)];
    }
    for (const auto& [attr, hist] : st.counts) {
        int total = 0;
        for (const auto& [_, n] : hist) total += n;
        for (const auto& [value, n] : hist)
            st.percentages[attr][value] = 100.0 * n / total;
    }
    return st;
}

std::string CorpusStats::table() const {
    std::ostringstream out;
    out << "attribute\tvalue\tcount\tpercent\n";
    for (const auto& [attr, hist] : counts)
        for (const auto& [value, n] : hist)
            out << attr << "\t" << value << "\t" << n << "\t" << percentages.at(attr).at(value)
                << "\n";
    return out.str();
}

Tensor Embedder::embed_text(const std::vector<std::string>&) const {
    throw std::runtime_error("embedder: text side not supported");
}

ToyJointEmbedder::ToyJointEmbedder(const LatentCodec& codec, int canvas)
    : codec_(codec), canvas_(canvas) {}

Tensor ToyJointEmbedder::embed_frame(const PixelFrame& frame) const {
    Tensor z = codec_.encode(frame).data;  // (c, h, w)
    Tensor v({z.dim(0)});
    int64_t per = static_cast<int64_t>(z.dim(1)) * z.dim(2);
    for (int c = 0; c < z.dim(0); ++c) {
        double s = 0;
        for (int64_t i = 0; i < per; ++i) s += z.data[c * per + i];
        v.data[static_cast<size_t>(c)] = s / static_cast<double>(per);
    }
    return unit_norm(std::move(v));
}

Tensor ToyJointEmbedder::embed_text(const std::vector<std::string>& prompt) const {
    return embed_frame(render_prompt_exemplar(prompt, canvas_));
}

double temporal_consistency(const VideoClip& clip, const Embedder& embedder,
                            std::vector<double>* pair_detail) {
    if (clip.length() < 2)
        throw std::invalid_argument("temporal_consistency: needs at least 2 frames");
    std::vector<Tensor> emb;
    for (const auto& f : clip.frames) emb.push_back(embedder.embed_frame(f));
    double sum = 0;
    for (size_t i = 0; i + 1 < emb.size(); ++i) {
        double c = cosine(emb[i], emb[i + 1]);
        if (pair_detail) pair_detail->push_back(c);
        sum += c;
    }
    return sum / static_cast<double>(emb.size() - 1);
}

double text_alignment(const VideoClip& clip, const std::vector<std::string>& prompt,
                      const Embedder& embedder) {
    if (!embedder.supports_text())
        throw std::invalid_argument("text_alignment: embedder has no text side");
    if (clip.length() < 1) throw std::invalid_argument("text_alignment: empty clip");
    Tensor p = embedder.embed_text(prompt);
    double sum = 0;
    for (const auto& f : clip.frames) sum += cosine(embedder.embed_frame(f), p);
    return sum / static_cast<double>(clip.length());
}

MetricsReport evaluate_clip(const VideoClip& clip, const std::vector<std::string>& prompt,
                            const Embedder& embedder) {
    MetricsReport rep;
    rep.tem_con = temporal_consistency(clip, embedder, &rep.pair_detail);
    rep.tex_ali = text_alignment(clip, prompt, embedder);
    return rep;
}

double edge_overlap(const VideoClip& a, const VideoClip& b) {
    if (a.length() != b.length() || a.length() == 0)
        throw std::invalid_argument("edge_overlap: clips must have equal nonzero length");
    double sum = 0;
    for (int i = 0; i < a.length(); ++i) {
        Tensor ea = extract_structure_frame(a.frames[size_t(i)], StructureKind::kEdge);
        Tensor eb = extract_structure_frame(b.frames[size_t(i)], StructureKind::kEdge);
        double dot = 0, na = 0, nb = 0;
        for (size_t k = 0; k < ea.data.size(); ++k) {
            dot += ea.data[k] * eb.data[k];
            na += ea.data[k] * ea.data[k];
            nb += eb.data[k] * eb.data[k];
        }
        // Edge-free frames: identical (empty) edges overlap fully.
        if (na == 0.0 && nb == 0.0)
            sum += 1.0;
        else if (na == 0.0 || nb == 0.0)
            sum += 0.0;
        else
            sum += dot / (std::sqrt(na) * std::sqrt(nb));
    }
    return sum / a.length();
}

nlohmann::json MetricsReport::to_json() const {
    return {{"tem_con", tem_con}, {"tex_ali", tex_ali}, {"pair_detail", pair_detail}};
}

std::string MetricsReport::table() const {
    std::ostringstream out;
    out << "metric\tvalue\n";
    out << "tem_con\t" << tem_con << "\n";
    out << "tex_ali\t" << tex_ali << "\n";
    for (size_t i = 0; i < pair_detail.size(); ++i)
        out << "pair_" << i << "\t" << pair_detail[i] << "\n";
    return out.str();
}

}  // namespace ccedit
