#include "jetvar/model.hpp"
#include "jetvar/render.hpp"

#include <doctest.h>
#include <fmt/format.h>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace jetvar;

namespace {

struct RunResult {
	int code = -1;
	std::string out;
	std::string err;
};

/* Spawn the installed binary; stdout through the pipe, stderr via a scratch
 * file so the two streams stay distinguishable. */
RunResult run_cli(const std::string& args)
{
	static int serial = 0;
	std::string err_path = fmt::format("/tmp/jetvar_cli_err_{}_{}.txt", getpid(), serial++);
	std::string cmd = fmt::format("{} {} 2>{}", JETVAR_CLI_PATH, args, err_path);
	RunResult r;
	FILE* pipe = popen(cmd.c_str(), "r");
	REQUIRE(pipe != nullptr);
	std::array<char, 4096> chunk;
	size_t got;
	while ((got = fread(chunk.data(), 1, chunk.size(), pipe)) > 0)
		r.out.append(chunk.data(), got);
	int status = pclose(pipe);
	r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
	std::ifstream ef(err_path);
	std::ostringstream eb;
	eb << ef.rdbuf();
	r.err = eb.str();
	std::remove(err_path.c_str());
	return r;
}

std::string model(const char* name)
{
	return std::string(JETVAR_MODEL_DIR) + "/" + name;
}

std::string data(const char* name)
{
	return std::string(JETVAR_TEST_DATA_DIR) + "/" + name;
}

int count_of(const std::string& text, const std::string& needle)
{
	int n = 0;
	for (size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1))
		++n;
	return n;
}

} // namespace

TEST_CASE("results on the model corpus")
{
	RunResult r = run_cli("el --model " + model("oscillator.jv"));
	CHECK(r.code == 0);
	CHECK(r.out == "E[y] = -(y_tt + omega^2*y)\norder: 2\n");
	CHECK(r.err.empty());

	r = run_cli("el --model " + model("quartic.jv"));
	CHECK(r.code == 0);
	CHECK(r.out == "E[y] = -(y_tt + y^3)\norder: 2\n");

	r = run_cli("el --model " + model("curvature.jv"));
	CHECK(r.code == 0);
	CHECK(r.out == "E[y] = y_tttt\norder: 4\n");

	r = run_cli("helmholtz --model " + model("quartic.jv"));
	CHECK(r.code == 0);
	CHECK(r.out == "locally variational: yes\n");

	r = run_cli("jacobi --model " + model("oscillator.jv"));
	CHECK(r.code == 0);
	CHECK(r.out == "J[y,y] = -omega^2\nJ[y,y]_tt = -1\nrows: 1\ncols: 1\n");

	r = run_cli("jacobi --model " + model("maxwell.jv"));
	CHECK(r.code == 0);
	CHECK(count_of(r.out, "jacobi[A[") == 4);
	CHECK(r.out.find("lift in the kernel: yes") != std::string::npos);

	r = run_cli("invariance --model " + model("maxwell.jv"));
	CHECK(r.code == 0);
	CHECK(r.out == "residual = 0\ninvariant: yes\n");

	r = run_cli("invariance --model " + model("noninvariant.jv"));
	CHECK(r.code == 0);
	CHECK(r.out.find("invariant: no") != std::string::npos);

	r = run_cli("noether --model " + model("topological.jv"));
	CHECK(r.code == 0);
	CHECK(r.out == "current[t] = 0\nresidual = 0\ninvariant: yes\n");

	r = run_cli("bianchi --model " + model("maxwell.jv"));
	CHECK(r.code == 0);
	CHECK(r.out.find("beta[eps] = 0\n") == 0);
	CHECK(r.out.find("identities hold: yes") != std::string::npos);

	r = run_cli("superpotential --model " + model("maxwell.jv"));
	CHECK(r.code == 0);
	CHECK(r.out.find("nu[x0,x1] = A[0]_x1*eps - A[1]_x0*eps\n") == 0);
}

TEST_CASE("check prints a pass/fail table with matching exit codes")
{
	RunResult r = run_cli("check --model " + model("maxwell.jv"));
	CHECK(r.code == 0);
	CHECK(count_of(r.out, "[PASS]") == 8);
	CHECK(count_of(r.out, "[FAIL]") == 0);
	CHECK(r.out.find("8 checks: 8 passed, 0 failed\n") != std::string::npos);

	r = run_cli("check --model " + model("topological.jv"));
	CHECK(r.code == 0);
	CHECK(count_of(r.out, "[FAIL]") == 0);

	r = run_cli("check --model " + model("oscillator.jv"));
	CHECK(r.code == 0);
	CHECK(count_of(r.out, "[PASS]") == 3);

	r = run_cli("check --model " + model("noninvariant.jv"));
	CHECK(r.code == 1);
	CHECK(r.out.find("[FAIL] lagrangian is invariant under the lift") != std::string::npos);
	CHECK(r.out.find("[FAIL] bianchi identities hold") != std::string::npos);
	CHECK(r.out.find("[PASS] noether current satisfies the off-shell identity") != std::string::npos);
	CHECK(r.out.find("7 checks: 5 passed, 2 failed\n") != std::string::npos);

	r = run_cli("check --model " + model("maxwell.jv") + " --format json");
	CHECK(r.code == 0);
	nlohmann::json root = nlohmann::json::parse(r.out);
	CHECK(root["schema"] == "jetvar-result/1");
	CHECK(root["command"] == "check");
	CHECK(root["passed"] == true);
	CHECK(root["rows"].size() == 8);
	for (const auto& row : root["rows"])
		CHECK(row["status"] == "pass");
}

TEST_CASE("diagnostics land on stderr with exit code 1")
{
	RunResult r = run_cli("el --model " + data("broken.jv"));
	CHECK(r.code == 1);
	CHECK(r.out.empty());
	CHECK(r.err == "error:7:30: expected number (an exponent), found '+'\n");

	r = run_cli("el --model " + data("undeclared.jv"));
	CHECK(r.code == 1);
	CHECK(r.err.find("undeclared identifier 'z'") != std::string::npos);

	r = run_cli("el --model " + data("badlift.jv"));
	CHECK(r.code == 1);
	CHECK(r.err.find("nonlinear in the parameter jets") != std::string::npos);

	r = run_cli("el --model " + model("vectorfield.jv"));
	CHECK(r.code == 1);
	CHECK(r.err.find("declares no Lagrangian") != std::string::npos);

	r = run_cli("el --model /nonexistent/path.jv");
	CHECK(r.code == 1);
	CHECK(r.err.find("cannot open model file") != std::string::npos);

	r = run_cli("noether --model " + model("oscillator.jv"));
	CHECK(r.code == 1);
	CHECK(r.err.find("needs parameters") != std::string::npos);

	r = run_cli("el --model " + model("oscillator.jv") + " --lagrangian absent");
	CHECK(r.code == 1);
	CHECK(r.err.find("no Lagrangian named 'absent'") != std::string::npos);

	r = run_cli("el --model " + model("curvature.jv") + " --max-order 1");
	CHECK(r.code == 1);
	CHECK(r.err.find("below the Lagrangian's order") != std::string::npos);

	/* bad usage: unknown format value, missing required flag */
	r = run_cli("el --model " + model("oscillator.jv") + " --format yaml");
	CHECK(r.code == 1);
	r = run_cli("el");
	CHECK(r.code == 1);
	r = run_cli("--help");
	CHECK(r.code == 0);
}

TEST_CASE("engine errors exit with code 2 and a structured message")
{
	RunResult r = run_cli("superpotential --model " + model("noninvariant.jv"));
	CHECK(r.code == 2);
	CHECK(r.out.empty());
	CHECK(r.err.find("error: BianchiNonzero:") == 0);

	r = run_cli("el --model " + model("curvature.jv") + " --max-order 2");
	CHECK(r.code == 2);
	CHECK(r.err.find("error: OrderOverflow:") == 0);
	CHECK(r.err.find("cap 2") != std::string::npos);
}

TEST_CASE("lagrangian selection")
{
	std::string path = fmt::format("/tmp/jetvar_two_{}.jv", getpid());
	{
		std::ofstream f(path);
		f << "bundle {\n\tbase t\n\tfield y\n\torder 6\n}\n"
		     "lagrangian kinetic = 1/2*y_t^2\n"
		     "lagrangian shifted = 1/2*y_t^2 - y\n";
	}
	RunResult r = run_cli("el --model " + path);
	CHECK(r.code == 1);
	CHECK(r.err.find("several Lagrangians (kinetic, shifted)") != std::string::npos);

	r = run_cli("el --model " + path + " --lagrangian shifted");
	CHECK(r.code == 0);
	CHECK(r.out == "E[y] = -(y_tt + 1)\norder: 2\n");
	std::remove(path.c_str());
}

TEST_CASE("formats and file output")
{
	RunResult r = run_cli("el --model " + model("oscillator.jv") + " --format latex");
	CHECK(r.code == 0);
	CHECK(r.out == "E[y] = -\\left({y}_{t t} + {\\omega}^{2} y\\right)\norder: 2\n");

	r = run_cli("el --model " + model("oscillator.jv") + " --format json");
	CHECK(r.code == 0);
	nlohmann::json root = nlohmann::json::parse(r.out);
	CHECK(root["schema"] == "jetvar-result/1");
	CHECK(root["command"] == "el");
	CHECK(root["lagrangian"] == "osc");
	CHECK(root["notes"]["order"] == 2);
	REQUIRE(root["items"].size() == 1);
	CHECK(root["items"][0]["label"] == "E[y]");
	BundleSpec mech{{"t"}, {"y"}, 8};
	Expression el = expression_from_json(root["items"][0]["expression"].dump(), mech);
	Expression expect = -Expression::jet(0, MultiIndex(std::vector<int>{2})) -
	                    Expression::param("omega").pow(2) * Expression::jet(0, MultiIndex::zero(1));
	CHECK(el == expect);

	/* superpotential payloads parse back against the product bundle */
	r = run_cli("superpotential --model " + model("maxwell.jv") + " --format json");
	CHECK(r.code == 0);
	root = nlohmann::json::parse(r.out);
	CHECK(root["items"].size() == 10); // 6 skew entries + 4 current components
	BundleSpec ext{{"x0", "x1", "x2", "x3"}, {"A[0]", "A[1]", "A[2]", "A[3]", "eps"}, 6};
	Expression eps = Expression::jet(4, MultiIndex::zero(4));
	CHECK(root["items"][0]["label"] == "nu[x0,x1]");
	Expression nu01 = expression_from_json(root["items"][0]["expression"].dump(), ext);
	CHECK(nu01 == (Expression::jet(0, MultiIndex::unit(4, 1)) -
	               Expression::jet(1, MultiIndex::unit(4, 0))) *
	                  eps);

	/* --out writes the exact stdout bytes to the file */
	std::string out_path = fmt::format("/tmp/jetvar_out_{}.txt", getpid());
	RunResult direct = run_cli("check --model " + model("maxwell.jv"));
	r = run_cli("check --model " + model("maxwell.jv") + " --out " + out_path);
	CHECK(r.code == 0);
	CHECK(r.out.empty());
	std::ifstream f(out_path);
	std::ostringstream fb;
	fb << f.rdbuf();
	CHECK(fb.str() == direct.out);
	std::remove(out_path.c_str());

	r = run_cli("el --model " + model("oscillator.jv") + " --out /nonexistent/dir/x.txt");
	CHECK(r.code == 1);
	CHECK(r.err.find("cannot write") != std::string::npos);
}

TEST_CASE("reruns are byte-identical")
{
	const char* invocations[] = {
	    "el --model {}/maxwell.jv --format json",
	    "superpotential --model {}/maxwell.jv --format json",
	    "noether --model {}/maxwell.jv",
	    "bianchi --model {}/maxwell.jv --format latex",
	    "check --model {}/maxwell.jv",
	    "el --model {}/vectorfield.jv",
	};
	for (const char* pattern : invocations)
	{
		std::string args = fmt::format(fmt::runtime(pattern), JETVAR_MODEL_DIR);
		CAPTURE(args);
		RunResult a = run_cli(args);
		RunResult b = run_cli(args);
		CHECK(a.code == b.code);
		CHECK(a.out == b.out);
		CHECK(a.err == b.err);
	}
}
