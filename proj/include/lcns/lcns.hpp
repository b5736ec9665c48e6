#pragma once

#include "lcns/cli.hpp"
#include "lcns/control.hpp"
#include "lcns/counterexamples.hpp"
#include "lcns/errors.hpp"
#include "lcns/evolution.hpp"
#include "lcns/fields.hpp"
#include "lcns/io.hpp"
#include "lcns/model.hpp"
#include "lcns/observability.hpp"
#include "lcns/oracle.hpp"
#include "lcns/spectrum.hpp"
#include "lcns/types.hpp"
