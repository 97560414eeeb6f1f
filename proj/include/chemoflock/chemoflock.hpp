#pragma once

#include <chemoflock/chemotaxis.hpp>
#include <chemoflock/compare.hpp>
#include <chemoflock/config.hpp>
#include <chemoflock/euler.hpp>
#include <chemoflock/grid.hpp>
#include <chemoflock/initial_data.hpp>
#include <chemoflock/particles.hpp>
#include <chemoflock/presets.hpp>
#include <chemoflock/runner.hpp>
#include <chemoflock/vlasov.hpp>
