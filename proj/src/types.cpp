// Copyright (c) the chaindns authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "chaindns/types.hpp"

namespace chaindns
{
  std::string_view to_string(Chain c)
  {
    return c == Chain::namecoin ? "namecoin" : "emercoin";
  }

  std::string_view to_string(OpKind k)
  {
    switch (k)
    {
      case OpKind::reg:
        return "register";
      case OpKind::update:
        return "update";
      default:
        return "delete";
    }
  }

  std::optional<Chain> chain_from_string(std::string_view s)
  {
    if (s == "namecoin")
      return Chain::namecoin;
    if (s == "emercoin")
      return Chain::emercoin;
    return std::nullopt;
  }

  std::optional<OpKind> op_from_string(std::string_view s)
  {
    if (s == "register")
      return OpKind::reg;
    if (s == "update")
      return OpKind::update;
    if (s == "delete")
      return OpKind::del;
    return std::nullopt;
  }
}
