#pragma once
// Live judges backed by a chat endpoint. The selection judge and the
// ordering judge share one client (and so one in-flight cap); malformed
// replies are repaired by the parser, never raised as errors.

#include <memory>
#include <utility>

#include "tourrank/baselines.hpp"
#include "tourrank/chat_client.hpp"
#include "tourrank/judge.hpp"

namespace tourrank {

class LlmJudge : public Judge {
public:
    explicit LlmJudge(std::shared_ptr<ChatClient> client) : client_(std::move(client)) {}

    JudgeSelection select(const JudgeRequest& request) const override {
        check_request(request);
        ChatReply reply = client_->complete(build_prompt(request));
        JudgeSelection selection = parse_selection(
            reply.content, static_cast<int>(request.presented.size()), request.m);
        selection.raw_response = std::move(reply.content);
        selection.transport_retries = reply.retries;
        return selection;
    }

private:
    std::shared_ptr<ChatClient> client_;
};

class LlmOrderingJudge : public OrderingJudge {
public:
    explicit LlmOrderingJudge(std::shared_ptr<ChatClient> client) : client_(std::move(client)) {}

    JudgeSelection order(const OrderingRequest& request) const override {
        check_ordering_request(request);
        ChatReply reply = client_->complete(build_ordering_prompt(request));
        const int n = static_cast<int>(request.presented.size());
        JudgeSelection selection = parse_selection(reply.content, n, n);
        selection.raw_response = std::move(reply.content);
        selection.transport_retries = reply.retries;
        return selection;
    }

private:
    std::shared_ptr<ChatClient> client_;
};

} // namespace tourrank
