#pragma once

#include "core.hpp"
#include "experts.hpp"
#include "hedge.hpp"
#include "sparse_dp.hpp"
#include "meta.hpp"
#include "environments.hpp"
#include "regret.hpp"
