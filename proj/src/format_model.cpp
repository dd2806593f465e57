#include "quanta/format_model.hpp"

#include "quanta/error.hpp"
#include "quanta/printer.hpp"

namespace quanta {

namespace {

std::optional<std::string> name_word(const InfonPtr& n) {
    if (n->kind == Kind::Name) {
        if (n->children.empty()) return std::nullopt;
        const InfonPtr& last = n->children.back();
        if (last->kind == Kind::String) return last->text;
        return std::nullopt;
    }
    if (n->kind == Kind::String && bare_word_ok(n->text)) return n->text;
    return std::nullopt;
}

std::string class_word(const InfonPtr& cls) {
    if (cls->kind == Kind::BuiltinClass) return cls->text;
    if (auto w = name_word(cls)) return *w;
    return "";
}

InfonList pattern_items(const InfonPtr& pattern) {
    if (pattern->kind == Kind::Collection) return pattern->children;
    return {pattern};
}

void collect_framing(const InfonPtr& item, std::set<std::string>& out) {
    if (item->kind == Kind::For) {
        for (size_t i = 0; i + 1 < item->children.size(); ++i) {
            const InfonPtr& range = item->children[i];
            if (range->kind != Kind::IntRange) continue;
            for (const auto& bound : range->children)
                if (auto w = name_word(bound)) out.insert(*w);
        }
    }
    for (const auto& c : item->children) collect_framing(c, out);
}

}  // namespace

FormatModel::FormatModel(Evaluator& ev, Context& ctx, InfonPtr pattern)
    : ev_(ev), ctx_(ctx), pattern_(std::move(pattern)) {}

FormatModel::Framing FormatModel::framing_of(const InfonPtr& pattern) {
    Framing f;
    collect_framing(pattern, f);
    return f;
}

long long FormatModel::field_int(const ParsedRecord& rec, const std::string& name) const {
    auto it = rec.fields.find(name);
    if (it == rec.fields.end())
        throw QuantaError(ErrorCode::MissingField, "field '" + name + "' is not bound");
    if (!is_int(it->second) || !it->second->ival.fits_int64())
        throw QuantaError(ErrorCode::Type, "field '" + name + "' is not a usable count");
    return it->second->ival.to_int64();
}

ParsedRecord FormatModel::parse(const std::string& input, size_t& offset) const {
    ParsedRecord rec;
    Cursor cur{&input, offset};
    Framing framing = framing_of(pattern_);
    for (const auto& item : pattern_items(pattern_)) parse_item(item, framing, cur, rec);
    offset = cur.pos;
    return rec;
}

std::string FormatModel::serialize(const ParsedRecord& rec) const {
    std::string out;
    size_t elem_idx = 0;
    Framing framing = framing_of(pattern_);
    for (const auto& item : pattern_items(pattern_))
        serialize_item(item, framing, rec, out, elem_idx);
    return out;
}

void FormatModel::parse_item(const InfonPtr& item, const Framing& framing, Cursor& cur,
                             ParsedRecord& rec) const {
    auto remaining = [&]() { return cur.s->size() - cur.pos; };

    auto record_field = [&](const std::string& name, const InfonPtr& v) {
        if (!rec.fields.count(name)) rec.field_order.push_back(name);
        rec.fields[name] = v;
    };

    auto read_anchor = [&](const std::string& name, const InfonPtr& lit) {
        if (!is_string(lit))
            throw QuantaError(ErrorCode::Type, "anchor for '" + name + "' must be text");
        const std::string& want = lit->text;
        if (remaining() < want.size())
            throw QuantaError(ErrorCode::PrematureEnd,
                              "stream ends inside anchor '" + name + "' at offset " +
                                  std::to_string(cur.pos));
        std::string got = cur.s->substr(cur.pos, want.size());
        if (got != want)
            throw QuantaError(ErrorCode::AnchorMismatch,
                              "expected \"" + want + "\" at offset " + std::to_string(cur.pos) +
                                  ", found \"" + got + "\"");
        cur.pos += want.size();
        record_field(name, lit);
        rec.elements.push_back(lit);
    };

    auto read_by_class = [&](const InfonPtr& cls) -> InfonPtr {
        std::string cw = class_word(cls);
        if (cw == "chars" || cw == "char") {
            if (remaining() < 1)
                throw QuantaError(ErrorCode::PrematureEnd,
                                  "stream ends at offset " + std::to_string(cur.pos));
            return mk_string(std::string(1, (*cur.s)[cur.pos++]));
        }
        if (cw == "ints" || cw == "numbers") {
            size_t start = cur.pos;
            if (cur.pos < cur.s->size() && (*cur.s)[cur.pos] == '-') ++cur.pos;
            while (cur.pos < cur.s->size() && (*cur.s)[cur.pos] >= '0' &&
                   (*cur.s)[cur.pos] <= '9')
                ++cur.pos;
            if (cur.pos == start || (cur.pos == start + 1 && (*cur.s)[start] == '-'))
                throw QuantaError(ErrorCode::PrematureEnd,
                                  "no digits at offset " + std::to_string(start));
            return mk_int(BigInt::parse(cur.s->substr(start, cur.pos - start)));
        }
        throw QuantaError(ErrorCode::Type, "model cannot read items of class " + quanta::serialize(cls));
    };

    switch (item->kind) {
        case Kind::Collection:
            for (const auto& m : item->children) parse_item(m, framing, cur, rec);
            return;
        case Kind::SeqContain:
            return;  // declares the record's name; no bytes
        case Kind::Contain: {
            if (item->children.size() < 2) return;
            const InfonPtr& cls = item->children[0];
            const InfonPtr& target = item->children[1];
            if (target->kind == Kind::Identity) {
                auto w = name_word(target->children[0]);
                if (!w) throw QuantaError(ErrorCode::Type, "anchor needs a field name");
                read_anchor(*w, target->children.back());
                return;
            }
            if (target->kind == Kind::Var ||
                (target->kind == Kind::Name && target->children.size() == 1 &&
                 target->children[0]->kind == Kind::Var)) {
                rec.elements.push_back(read_by_class(cls));  // numbered position
                return;
            }
            auto w = name_word(target);
            if (!w) throw QuantaError(ErrorCode::Type, "unreadable model item");
            InfonPtr v = read_by_class(cls);
            record_field(*w, v);
            if (!framing.count(*w)) rec.elements.push_back(v);
            return;
        }
        case Kind::Identity: {
            auto w = name_word(item->children[0]);
            if (!w) throw QuantaError(ErrorCode::Type, "anchor needs a field name");
            auto it = rec.fields.find(*w);
            if (it != rec.fields.end()) {
                if (!structural_equal(it->second, item->children.back()))
                    throw QuantaError(ErrorCode::AnchorMismatch,
                                      "field '" + *w + "' is " + quanta::serialize(it->second) +
                                          ", model requires " +
                                          quanta::serialize(item->children.back()));
                return;
            }
            read_anchor(*w, item->children.back());
            return;
        }
        case Kind::For: {
            const InfonPtr& range = item->children[0];
            if (range->kind != Kind::IntRange)
                throw QuantaError(ErrorCode::Type, "repetition needs an integer range");
            long long lo, hi;
            bool hi_exclusive;
            auto bound = [&](const InfonPtr& bnd, bool& exclusive) -> long long {
                if (is_int(bnd)) {
                    exclusive = false;
                    return bnd->ival.fits_int64() ? bnd->ival.to_int64() : -1;
                }
                if (auto w = name_word(bnd)) {
                    exclusive = true;  // counted by an earlier field
                    return field_int(rec, *w);
                }
                throw QuantaError(ErrorCode::Type, "unreadable repetition bound");
            };
            bool lo_ex;
            lo = bound(range->children[0], lo_ex);
            hi = bound(range->children[1], hi_exclusive);
            long long end = hi_exclusive ? hi : hi + 1;
            for (long long i = lo; i < end; ++i)
                parse_item(item->children.back(), framing, cur, rec);
            return;
        }
        case Kind::Conditional: {
            InfonPtr cond = item->children[0];
            if (cond->kind == Kind::BoolQuery) cond = cond->children[0];
            bool truth = false;
            if (cond->kind == Kind::Identity) {
                auto w = name_word(cond->children[0]);
                if (!w) throw QuantaError(ErrorCode::Type, "condition needs a bound field");
                auto it = rec.fields.find(*w);
                if (it == rec.fields.end())
                    throw QuantaError(ErrorCode::MissingField,
                                      "condition on unbound field '" + *w + "'");
                truth = structural_equal(it->second, cond->children.back());
            } else {
                throw QuantaError(ErrorCode::Type, "model condition must compare a field");
            }
            if (truth)
                parse_item(item->children[1], framing, cur, rec);
            else if (item->children.size() > 2)
                parse_item(item->children[2], framing, cur, rec);
            return;
        }
        case Kind::Name: {
            // Reference to another named model: expand and parse inline.
            InfonPtr v = ev_.normalize_value(ctx_, item, Mode::Query);
            if (v->kind == Kind::Match) {
                const InfonPtr& sub = v->children[0];
                Framing sub_framing = framing_of(sub);
                for (const auto& m : pattern_items(sub)) parse_item(m, sub_framing, cur, rec);
                return;
            }
            throw QuantaError(ErrorCode::Type,
                              quanta::serialize(item) + " does not name a format description");
        }
        default:
            throw QuantaError(ErrorCode::Type,
                              "model item cannot be parsed: " + quanta::serialize(item));
    }
}

void FormatModel::serialize_item(const InfonPtr& item, const Framing& framing,
                                 const ParsedRecord& rec, std::string& out,
                                 size_t& elem_idx) const {
    auto next_elem = [&]() -> InfonPtr {
        if (elem_idx >= rec.elements.size())
            throw QuantaError(ErrorCode::PrematureEnd, "record has too few elements");
        return rec.elements[elem_idx++];
    };
    auto field_of = [&](const std::string& name) -> InfonPtr {
        auto it = rec.fields.find(name);
        if (it == rec.fields.end())
            throw QuantaError(ErrorCode::MissingField, "field '" + name + "' is not bound");
        return it->second;
    };

    switch (item->kind) {
        case Kind::Collection:
            for (const auto& m : item->children) serialize_item(m, framing, rec, out, elem_idx);
            return;
        case Kind::SeqContain:
            return;
        case Kind::Contain: {
            if (item->children.size() < 2) return;
            const InfonPtr& target = item->children[1];
            if (target->kind == Kind::Identity) {
                auto w = name_word(target->children[0]);
                if (!w) throw QuantaError(ErrorCode::Type, "anchor needs a field name");
                out += render_text(field_of(*w));
                ++elem_idx;  // the anchor occupies an element slot
                return;
            }
            if (target->kind == Kind::Var ||
                (target->kind == Kind::Name && target->children.size() == 1 &&
                 target->children[0]->kind == Kind::Var)) {
                out += render_text(next_elem());
                return;
            }
            auto w = name_word(target);
            if (!w) throw QuantaError(ErrorCode::Type, "unwritable model item");
            if (framing.count(*w)) {
                out += render_text(field_of(*w));
            } else {
                out += render_text(next_elem());
            }
            return;
        }
        case Kind::Identity: {
            auto w = name_word(item->children[0]);
            if (!w) throw QuantaError(ErrorCode::Type, "anchor needs a field name");
            auto it = rec.fields.find(*w);
            if (it == rec.fields.end()) return;  // verification-only identity
            out += render_text(it->second);
            ++elem_idx;
            return;
        }
        case Kind::For: {
            const InfonPtr& range = item->children[0];
            long long lo = 0, end = 0;
            if (is_int(range->children[0])) lo = range->children[0]->ival.to_int64();
            if (is_int(range->children[1]))
                end = range->children[1]->ival.to_int64() + 1;
            else if (auto w = name_word(range->children[1]))
                end = field_int(rec, *w);
            for (long long i = lo; i < end; ++i)
                serialize_item(item->children.back(), framing, rec, out, elem_idx);
            return;
        }
        case Kind::Conditional: {
            InfonPtr cond = item->children[0];
            if (cond->kind == Kind::BoolQuery) cond = cond->children[0];
            if (cond->kind != Kind::Identity)
                throw QuantaError(ErrorCode::Type, "model condition must compare a field");
            auto w = name_word(cond->children[0]);
            if (!w) throw QuantaError(ErrorCode::Type, "condition needs a bound field");
            auto it = rec.fields.find(*w);
            bool truth =
                it != rec.fields.end() && structural_equal(it->second, cond->children.back());
            if (truth)
                serialize_item(item->children[1], framing, rec, out, elem_idx);
            else if (item->children.size() > 2)
                serialize_item(item->children[2], framing, rec, out, elem_idx);
            return;
        }
        case Kind::Name: {
            InfonPtr v = ev_.normalize_value(ctx_, item, Mode::Query);
            if (v->kind == Kind::Match) {
                const InfonPtr& sub = v->children[0];
                Framing sub_framing = framing_of(sub);
                for (const auto& m : pattern_items(sub))
                    serialize_item(m, sub_framing, rec, out, elem_idx);
                return;
            }
            throw QuantaError(ErrorCode::Type,
                              quanta::serialize(item) + " does not name a format description");
        }
        default:
            throw QuantaError(ErrorCode::Type,
                              "model item cannot be serialized: " + quanta::serialize(item));
    }
}

}  // namespace quanta
