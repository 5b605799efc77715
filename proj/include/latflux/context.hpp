#ifndef LATFLUX_CONTEXT_HPP
#define LATFLUX_CONTEXT_HPP

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bitset.hpp"

namespace latflux {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A formal context (G, M, I): object names, attribute names and the
/// incidence relation stored row-wise (one attribute set per object).
class FormalContext {
public:
    FormalContext() = default;

    FormalContext(std::vector<std::string> objects, std::vector<std::string> attributes,
                  const std::vector<std::vector<bool>>& incidence)
        : objects_(std::move(objects)), attributes_(std::move(attributes)) {
        if (incidence.size() != objects_.size())
            throw InputError("incidence has " + std::to_string(incidence.size()) + " rows, expected " +
                             std::to_string(objects_.size()));
        rows_.reserve(objects_.size());
        for (const auto& row : incidence) {
            if (row.size() != attributes_.size())
                throw InputError("incidence row has " + std::to_string(row.size()) + " entries, expected " +
                                 std::to_string(attributes_.size()));
            BitSet r(attributes_.size());
            for (std::size_t m = 0; m < row.size(); ++m)
                if (row[m]) r.set(m);
            rows_.push_back(std::move(r));
        }
        validate_names();
        build_columns();
    }

    static FormalContext from_bitsets(std::vector<std::string> objects, std::vector<std::string> attributes,
                                      std::vector<BitSet> rows) {
        FormalContext ctx;
        ctx.objects_ = std::move(objects);
        ctx.attributes_ = std::move(attributes);
        ctx.rows_ = std::move(rows);
        if (ctx.rows_.size() != ctx.objects_.size()) throw InputError("row count does not match object count");
        for (const auto& r : ctx.rows_)
            if (r.size() != ctx.attributes_.size()) throw InputError("row width does not match attribute count");
        ctx.validate_names();
        ctx.build_columns();
        return ctx;
    }

    const std::vector<std::string>& objects() const noexcept { return objects_; }
    const std::vector<std::string>& attributes() const noexcept { return attributes_; }
    std::size_t object_count() const noexcept { return objects_.size(); }
    std::size_t attribute_count() const noexcept { return attributes_.size(); }

    bool incident(std::size_t g, std::size_t m) const { return rows_.at(g).test(m); }
    const BitSet& row(std::size_t g) const { return rows_.at(g); }
    const BitSet& column(std::size_t m) const { return columns_.at(m); }

    /// A' : attributes shared by every object of A (all attributes for A = {}).
    BitSet derive_objects(const BitSet& objects) const {
        if (objects.size() != object_count()) throw std::invalid_argument("object set has wrong universe");
        BitSet out = BitSet::full(attribute_count());
        objects.for_each([&](std::size_t g) { out &= rows_[g]; });
        return out;
    }

    /// B' : objects having every attribute of B.
    BitSet derive_attributes(const BitSet& attributes) const {
        if (attributes.size() != attribute_count()) throw std::invalid_argument("attribute set has wrong universe");
        BitSet out = BitSet::full(object_count());
        attributes.for_each([&](std::size_t m) { out &= columns_[m]; });
        return out;
    }

    BitSet close_intent(const BitSet& attributes) const { return derive_objects(derive_attributes(attributes)); }
    BitSet close_extent(const BitSet& objects) const { return derive_attributes(derive_objects(objects)); }

    friend bool operator==(const FormalContext& a, const FormalContext& b) {
        return a.objects_ == b.objects_ && a.attributes_ == b.attributes_ && a.rows_ == b.rows_;
    }

private:
    void validate_names() const {
        std::set<std::string> seen;
        for (const auto& g : objects_)
            if (!seen.insert(g).second) throw InputError("duplicate object name: " + g);
        seen.clear();
        for (const auto& m : attributes_)
            if (!seen.insert(m).second) throw InputError("duplicate attribute name: " + m);
    }
    void build_columns() {
        columns_.assign(attributes_.size(), BitSet(objects_.size()));
        for (std::size_t g = 0; g < rows_.size(); ++g) rows_[g].for_each([&](std::size_t m) { columns_[m].set(g); });
    }

    std::vector<std::string> objects_;
    std::vector<std::string> attributes_;
    std::vector<BitSet> rows_;
    std::vector<BitSet> columns_;
};

} // namespace latflux

#endif // LATFLUX_CONTEXT_HPP
