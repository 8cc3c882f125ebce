"""Synthetic corpora reproducing the constraint patterns of two industrial
case studies (an annotation rule, a serialisation rule, a factory rule, a
dependency-injection rule) and the Controller/DAO declaration scenario.

Each corpus is Java-subset source plus a DCL file, small enough to read but
shaped so that every recommendation rule fires where it should.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .dcl import ConstraintSet, parse_dcl
from .extractor import extract_sources
from .facts import FactsDatabase


@dataclass(frozen=True)
class Corpus:
    name: str
    sources: dict[str, str]
    dcl: str
    # offender simple name -> rule expected as top recommendation
    expected: dict[str, str] = field(default_factory=dict)

    def facts(self) -> FactsDatabase:
        return extract_sources(self.sources)

    def constraints(self) -> ConstraintSet:
        return parse_dcl(self.dcl)

    def write(self, root: str | Path) -> tuple[Path, Path]:
        """Write sources under ``root/src`` and the DCL to ``root/<name>.dcl``."""
        root = Path(root)
        src = root / "src"
        for rel, text in self.sources.items():
            path = src / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        src.mkdir(parents=True, exist_ok=True)
        dcl = root / f"{self.name.lower()}.dcl"
        dcl.write_text(self.dcl, encoding="utf-8")
        return src, dcl


def _unit(package: str, imports: list[str], body: str) -> str:
    head = f"package {package};\n\n"
    head += "".join(f"import {i};\n" for i in imports)
    return head + ("\n" if imports else "") + body.strip() + "\n"


def _path(package: str, name: str) -> str:
    return f"{package.replace('.', '/')}/{name}.java"


def gp4(total: int = 20, missing: int = 18) -> Corpus:
    """Entities must carry a class-level description annotation."""
    pkg = "com.neo.entities"
    ann = "linkcom.neo.bean.annotation.DescriptionProperty"
    sources = {}
    expected = {}
    for i in range(1, total + 1):
        name = f"Entity{i:02d}"
        annotated = i > missing
        body = (
            ("@DescriptionProperty\n" if annotated else "")
            + f"public class {name} {{\n"
            "    private String name;\n"
            "    private Date created;\n"
            "    private Integer version;\n"
            "    public String getName() { return name; }\n"
            "}\n"
        )
        imports = ["java.util.Date"] + ([ann] if annotated else [])
        sources[_path(pkg, name)] = _unit(pkg, imports, body)
        if not annotated:
            expected[name] = "A6"
    svc = "com.neo.service"
    sources[_path(svc, "PlanningService")] = _unit(svc, [f"{pkg}.Entity01", f"{pkg}.Entity02", "javax.persistence.EntityManager"], """
public class PlanningService {
    private EntityManager em;
    public Entity01 load(Entity02 key) {
        Entity01 found = new Entity01();
        em.persist(found);
        return found;
    }
}
""")
    view = "com.neo.view"
    sources[_path(view, "PlanView")] = _unit(view, ["javax.swing.JPanel", "javax.swing.JButton"], """
public class PlanView {
    private JPanel panel;
    private JButton save;
    public void render() { panel.add(save); }
}
""")
    dcl = f"""% description properties are mandatory for persistent classes
module Entities: {pkg}.**
module Services: {svc}.**
module Views: {view}.**
GP4: Entities must-useannotation {ann}
"""
    return Corpus("GP4", sources, dcl, expected)


def tc1(total: int = 10, missing: int = 8, misplaced: int = 2) -> Corpus:
    """DTOs must be serialisable; a few DTOs look like constant holders."""
    pkg = "tcom.dto"
    sources = {}
    expected = {}
    first_missing = total - missing + 1
    first_misplaced = total - misplaced + 1
    for i in range(1, total + 1):
        name = f"Dto{i:02d}"
        serial = i < first_missing
        constant_like = i >= first_misplaced
        if constant_like:
            imports = ["java.math.BigDecimal"]
            fields = "    private String label;\n    private Integer code;\n    private BigDecimal rate;\n"
        else:
            imports = ["java.util.Date", "java.util.List"]
            fields = "    private String name;\n    private Long id;\n    private List items;\n    private Date updated;\n"
        if serial:
            imports.append("java.io.Serializable")
        header = f"public class {name}" + (" implements Serializable" if serial else "")
        sources[_path(pkg, name)] = _unit(pkg, imports, f"{header} {{\n{fields}}}\n")
        if not serial:
            expected[name] = "A4" if constant_like else "A3"
    cst = "tcom.constant"
    for name in ("StatusConstants", "RateConstants"):
        sources[_path(cst, name)] = _unit(cst, ["java.math.BigDecimal"], f"""
public class {name} {{
    public static String PREFIX;
    public static Integer DEFAULT_CODE;
    public static BigDecimal BASE_RATE;
}}
""")
    dcl = f"""module DTO: {pkg}.**
module Constant: {cst}.**
TC1: DTO must-implement java.io.Serializable
"""
    return Corpus("TC1", sources, dcl, expected)


_DAOS = ("CustomerDAO", "InvoiceDAO", "OrderDAO", "ProductDAO", "UserDAO")
# service name -> DAOs it instantiates (13 instantiations in total)
_SERVICES = {
    "UserService": ("UserDAO", "UserDAO", "CustomerDAO", "OrderDAO"),
    "OrderService": ("OrderDAO", "ProductDAO", "InvoiceDAO"),
    "BillingService": ("InvoiceDAO", "CustomerDAO", "OrderDAO"),
    "ReportService": ("ProductDAO", "UserDAO", "InvoiceDAO"),
}


def tc5() -> Corpus:
    """Only the JPA base DAO may instantiate DAOs; services bypass it."""
    dao = "tcom.server.persistence.dao"
    sources = {}
    for name in _DAOS:
        if name == "OrderDAO":
            ctor = "    private String tenant;\n    public OrderDAO(String tenant) { this.tenant = tenant; }\n"
        else:
            ctor = ""
        sources[_path(dao, name)] = _unit(dao, [], f"""
public class {name} {{
{ctor}    public void save(String key) {{ }}
}}
""")
    getters = []
    for name in _DAOS:
        if name == "OrderDAO":
            getters.append(f"    public static {name} get{name}(String tenant) {{ return new {name}(tenant); }}")
        else:
            getters.append(f"    public static {name} get{name}() {{ return new {name}(); }}")
    sources[_path(dao, "BaseJPADAO")] = _unit(dao, [], "public class BaseJPADAO {\n" + "\n".join(getters) + "\n}\n")
    svc = "tcom.server.service"
    expected = {}
    for service, daos in _SERVICES.items():
        lines = []
        for i, d in enumerate(daos):
            arg = '"acme"' if d == "OrderDAO" else ""
            lines.append(f"        {d} dao{i} = new {d}({arg});\n        dao{i}.save(key);")
        body = f"public class {service} {{\n    public void run(String key) {{\n" + "\n".join(lines) + "\n    }\n}\n"
        sources[_path(svc, service)] = _unit(svc, [f"{dao}.{d}" for d in sorted(set(daos))], body)
        expected[service] = "D11"
    dcl = f"""module DAO: {dao}.**
module Service: {svc}.**
TC5: only {dao}.BaseJPADAO can-create DAO
"""
    return Corpus("TC5", sources, dcl, expected)


def tc9() -> Corpus:
    """Controllers and data sources come from dependency injection only."""
    ctl, ds, boot = "tcom.web.controller", "tcom.infra.ds", "tcom.boot"
    sources = {
        _path(ctl, "CustomerController"): _unit(ctl, [], """
public class CustomerController {
    public void handle() { }
}
"""),
        _path(ds, "MainDataSource"): _unit(ds, [], """
public class MainDataSource {
    private String url;
    public MainDataSource(String url) { this.url = url; }
}
"""),
        _path(boot, "Bootstrap"): _unit(boot, [f"{ctl}.CustomerController", f"{ds}.MainDataSource"], """
public class Bootstrap {
    public void start() {
        new CustomerController();
        MainDataSource source = new MainDataSource("jdbc:tcom");
    }
}
"""),
        _path(boot, "Wiring"): _unit(boot, [f"{ctl}.CustomerController"], """
public class Wiring {
    public void wire() {
        CustomerController c = new CustomerController();
        c.handle();
    }
}
"""),
    }
    dcl = f"""module Controller: {ctl}.**
module DataSource: {ds}.**
module Boot: {boot}.**
TC9: $system cannot-create Controller, DataSource
"""
    return Corpus("TC9", sources, dcl, {"Bootstrap": "D12", "Wiring": "D12"})


def dao_interface(uses_flush: bool = False) -> Corpus:
    """A controller declares a concrete Hibernate DAO instead of its interface.

    With ``uses_flush`` the controller also calls a method only the concrete
    hierarchy provides, so no admissible supertype exists.
    """
    sources = {
        _path("app.model", "Product"): _unit("app.model", [], "public class Product { }\n"),
        _path("app.dao", "IProductDAO"): _unit("app.dao", ["app.model.Product"], """
public interface IProductDAO {
    void save(Product p);
    Product find(long id);
}
"""),
        _path("app.dao.hibernate", "HibernateSupport"): _unit("app.dao.hibernate", [], """
public class HibernateSupport {
    public void flush() { }
}
"""),
        _path("app.dao.hibernate", "ProductHibernateDAO"): _unit(
            "app.dao.hibernate", ["app.dao.IProductDAO", "app.model.Product"], """
public class ProductHibernateDAO extends HibernateSupport implements IProductDAO {
    public void save(Product p) { }
    public Product find(long id) { return null; }
}
"""),
        _path("app.dao", "DaoLocator"): _unit("app.dao", ["app.dao.hibernate.ProductHibernateDAO"], """
public class DaoLocator {
    public static ProductHibernateDAO productDao() { return new ProductHibernateDAO(); }
}
"""),
        _path("app.controller", "ProductController"): _unit(
            "app.controller", ["app.dao.DaoLocator", "app.dao.hibernate.ProductHibernateDAO", "app.model.Product"],
            """
public class ProductController {
    public void update(long id) {
        ProductHibernateDAO dao = DaoLocator.productDao();
        Product p = dao.find(id);
        dao.save(p);
"""
            + ("        dao.flush();\n" if uses_flush else "")
            + "    }\n}\n",
        ),
    }
    dcl = """module Controller: app.controller.**
module HibernateDAO: app.dao.hibernate.**
D1: Controller cannot-depend HibernateDAO
"""
    return Corpus("D1" if not uses_flush else "D1-flush", sources, dcl, {"ProductController": "D1"} if not uses_flush else {})


def view_model() -> Corpus:
    """A view calls straight into the model: no catalogue rule repairs it."""
    sources = {
        _path("ui.model", "Ledger"): _unit("ui.model", [], """
public class Ledger {
    public static int total() { return 0; }
}
"""),
        _path("ui.view", "LedgerView"): _unit("ui.view", ["ui.model.Ledger"], """
public class LedgerView {
    public int show() { return Ledger.total(); }
}
"""),
    }
    dcl = """module View: ui.view.**
module Model: ui.model.**
V1: View cannot-access Model
"""
    return Corpus("VIEW", sources, dcl, {})


def clean() -> Corpus:
    sources = {
        _path("ok.core", "Thing"): _unit("ok.core", [], "public class Thing { }\n"),
        _path("ok.app", "Main"): _unit("ok.app", ["ok.core.Thing"], """
public class Main {
    public void run() { Thing t = new Thing(); }
}
"""),
    }
    dcl = """module Core: ok.core.**
module App: ok.app.**
Core cannot-depend App
"""
    return Corpus("CLEAN", sources, dcl, {})


CASE_STUDIES = {"GP4": gp4, "TC1": tc1, "TC5": tc5, "TC9": tc9}


def all_corpora() -> list[Corpus]:
    return [gp4(), tc1(), tc5(), tc9(), dao_interface(), dao_interface(uses_flush=True), view_model(), clean()]
