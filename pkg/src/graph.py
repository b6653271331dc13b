from langgraph.graph import START, END, StateGraph
from state import SearchState
from nodes import (
    seed_node,
    propose_node,
    dispatch_node,
    collect_node,
)
from routers import route_after_dispatch, route_after_collect


# StateGraph builder
builder = StateGraph(SearchState)

builder.add_node("seed_node", seed_node)
builder.add_node("propose_node", propose_node)
builder.add_node("dispatch_node", dispatch_node)
builder.add_node("collect_node", collect_node)

builder.add_edge(START, "seed_node")
builder.add_edge("seed_node", "propose_node")
builder.add_edge("propose_node", "dispatch_node")

builder.add_conditional_edges(
    "dispatch_node",
    route_after_dispatch,
    {
        "propose": "propose_node",
        "collect": "collect_node",
    }
)

builder.add_conditional_edges(
    "collect_node",
    route_after_collect,
    {
        "propose": "propose_node",
        "collect": "collect_node",
        END: END,
    }
)

app = builder.compile()

# steps per evaluation: propose, dispatch, collect
STEPS_PER_EVALUATION = 3


def recursion_limit(budget: int) -> int:
    return STEPS_PER_EVALUATION * budget + 10


if __name__ == "__main__":
    print("search graph compiled; nodes:")
    for node in app.get_graph().nodes:
        print(f"- {node}")
