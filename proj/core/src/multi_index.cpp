#include "jetvar/multi_index.hpp"

#include <algorithm>

namespace jetvar {

static void emit_of_order(int dim, int q, int dir, MultiIndex& acc, std::vector<MultiIndex>& out)
{
	if (dir == dim - 1)
	{
		std::vector<int> counts = acc.counts();
		counts[dir] = q;
		out.emplace_back(std::move(counts));
		return;
	}
	for (int c = 0; c <= q; ++c)
	{
		std::vector<int> counts = acc.counts();
		counts[dir] = c;
		MultiIndex next(std::move(counts));
		emit_of_order(dim, q - c, dir + 1, next, out);
	}
}

std::vector<MultiIndex> multi_indices_of_order(int dim, int q)
{
	std::vector<MultiIndex> out;
	if (dim <= 0)
		return out;
	MultiIndex acc(dim);
	emit_of_order(dim, q, 0, acc, out);
	std::sort(out.begin(), out.end(), MultiIndexLess{});
	return out;
}

std::vector<MultiIndex> multi_indices_up_to(int dim, int q)
{
	std::vector<MultiIndex> out;
	for (int d = 0; d <= q; ++d)
	{
		auto layer = multi_indices_of_order(dim, d);
		out.insert(out.end(), layer.begin(), layer.end());
	}
	return out;
}

std::vector<std::pair<MultiIndex, MultiIndex>> multi_index_splits(const MultiIndex& alpha)
{
	std::vector<std::pair<MultiIndex, MultiIndex>> out;
	for (const MultiIndex& beta : multi_indices_up_to(alpha.dim(), alpha.order()))
		if (alpha.contains(beta))
			out.emplace_back(beta, alpha.minus(beta));
	return out;
}

} // namespace jetvar
