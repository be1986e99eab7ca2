#pragma once

#include "hypgram/ast.hpp"
#include "hypgram/dataset.hpp"
#include "hypgram/errors.hpp"
#include "hypgram/evaluator.hpp"
#include "hypgram/funcs.hpp"
#include "hypgram/grammar.hpp"
#include "hypgram/lexer.hpp"
#include "hypgram/parser.hpp"
#include "hypgram/space.hpp"
#include "hypgram/value.hpp"
