from langgraph.graph import END

from state import SearchState


def route_after_dispatch(state: SearchState) -> str:
    """Keep filling free workers while budget remains, otherwise wait."""
    if len(state["in_flight"]) < state["n_workers"] and state["dispatched"] < state["budget"]:
        return "propose"
    return "collect"


def route_after_collect(state: SearchState) -> str:
    if len(state["completed"]) >= state["budget"]:
        return END
    # the completion freed a worker
    if state["dispatched"] < state["budget"]:
        return "propose"
    return "collect"
